//! PCA morphable-model instancing and landmark fitting.
//!
//! The projection model is a 2x4 affine camera, so with the camera fixed the
//! shape step is a ridge-regularized linear least-squares problem, and with
//! the shape fixed the camera step is ordinary least squares. Fitting
//! alternates the two.

mod camera;
mod layout;
mod model;
mod shape;
mod texture;

use thiserror::Error;

pub use camera::{estimate_affine_camera, reprojection_rmse, AffineCamera};
pub use layout::ibug_parameters;
pub use model::{instance_mesh, synthesize_model, MorphableModel, ShapeCoefficients};
pub use shape::{fit_from_photo_landmarks, fit_shape, fit_shape_capped, FitOptions, FitResult};
pub use texture::{extract_texture, photo_landmarks_to_texture};

#[derive(Debug, Error)]
pub enum FitError {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("model file: {0}")]
    ModelFormat(String),
    #[error("expected {expected} shape coefficients, got {got}")]
    CoefficientCount { expected: usize, got: usize },
    #[error("{0} 2D points but {1} 3D points")]
    CorrespondenceCount(usize, usize),
    #[error("need at least 4 correspondences, got {0}")]
    TooFewCorrespondences(usize),
    #[error("rank deficient: {0}")]
    RankDeficient(String),
    #[error("shape system is singular; use lambda > 0")]
    SingularShapeSystem,
    #[error("expected {expected} landmarks, got {got}")]
    LandmarkCount { expected: usize, got: usize },
    #[error("invalid fit option: {0}")]
    InvalidOption(String),
    #[error(transparent)]
    Image(#[from] crate::raster::ImageError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
