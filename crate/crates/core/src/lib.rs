//! Facial expression interpolation between two landmark-annotated photos.
//!
//! The pipeline has three stages:
//!
//! 1. Fit a PCA morphable face model to each photo's 68 landmarks
//!    ([`fitting`]).
//! 2. Morph the two texture images through a shared landmark triangulation
//!    ([`geometry`], [`morph`]).
//! 3. Linearly interpolate the fitted meshes, which share connectivity, and
//!    render the result with Phong shading ([`mesh`], [`render`]).
//!
//! [`pipeline`] strings the stages together into an animation and hosts the
//! mesh interpolation benchmark.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod fitting;
pub mod geometry;
pub mod interp;
pub mod landmarks;
pub mod mesh;
pub mod morph;
pub mod pipeline;
pub mod raster;
pub mod render;

pub use fitting::{
    estimate_affine_camera, extract_texture, fit_from_photo_landmarks, fit_shape, instance_mesh,
    synthesize_model, AffineCamera, FitError, FitOptions, FitResult, MorphableModel,
    ShapeCoefficients,
};
pub use geometry::{
    barycentric_coords, circumcircle_contains, delaunay_triangulate, locate_point,
    BarycentricWeights, GeometryError, PointLocator, Triangulation,
};
pub use landmarks::{add_boundary_anchors, parse_pts, write_pts, LandmarkError, LandmarkSet};
pub use mesh::{
    compute_vertex_normals, interpolate_mesh, load_obj, same_topology, save_obj, MeshError,
    TriangleMesh,
};
pub use morph::{
    build_correspondence, interpolate_landmarks, warp_blend, MorphError, MorphMapping,
};
pub use pipeline::{
    parse_config, run_animation, run_bench, BenchReport, ConfigOverrides, MorphSpace,
    PipelineConfig, PipelineError,
};
pub use raster::{load_image, save_image, Image, ImageError, Rgb};
pub use render::{phong_shade, rasterize, Material, RenderCamera, RenderParams, View};

pub type Point2 = nalgebra::Point2<f64>;
pub type Point3 = nalgebra::Point3<f64>;
pub type Vector3 = nalgebra::Vector3<f64>;
