//! Indexed triangle meshes and linear vertex interpolation.

mod obj;

use log::warn;
use thiserror::Error;

use crate::interp;
use crate::{Point2, Point3, Vector3};

pub use obj::{load_obj, save_obj};

/// Largest allowed uv difference between meshes that are interpolated.
pub const UV_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum MeshError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("face {face} references vertex {index} but only {len} exist")]
    IndexOutOfRange {
        face: usize,
        index: usize,
        len: usize,
    },
    #[error("meshes differ in topology")]
    TopologyMismatch,
    #[error("uv coordinates differ at vertex {0}")]
    UvMismatch(usize),
    #[error("interpolation factor {0} outside [0, 1]")]
    FactorOutOfRange(f64),
    #[error("{uvs} uvs for {vertices} vertices")]
    UvCount { uvs: usize, vertices: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    pub vertices: Vec<Point3>,
    /// One texture coordinate per vertex, `v` pointing up in the texture.
    pub uvs: Vec<Point2>,
    pub faces: Vec<[u32; 3]>,
    pub normals: Option<Vec<Vector3>>,
}

impl TriangleMesh {
    pub fn new(
        vertices: Vec<Point3>,
        uvs: Vec<Point2>,
        faces: Vec<[u32; 3]>,
    ) -> Result<Self, MeshError> {
        if uvs.len() != vertices.len() {
            return Err(MeshError::UvCount {
                uvs: uvs.len(),
                vertices: vertices.len(),
            });
        }
        for (face, f) in faces.iter().enumerate() {
            if let Some(&index) = f.iter().find(|&&i| i as usize >= vertices.len()) {
                return Err(MeshError::IndexOutOfRange {
                    face,
                    index: index as usize,
                    len: vertices.len(),
                });
            }
        }
        Ok(Self {
            vertices,
            uvs,
            faces,
            normals: None,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Component-wise `(min, max)` of the vertex positions.
    pub fn bounding_box(&self) -> Option<(Point3, Point3)> {
        let first = *self.vertices.first()?;
        Some(
            self.vertices
                .iter()
                .fold((first, first), |(lo, hi), v| (lo.inf(v), hi.sup(v))),
        )
    }

    pub fn centroid(&self) -> Point3 {
        let n = self.vertices.len().max(1) as f64;
        let sum = self
            .vertices
            .iter()
            .fold(Vector3::zeros(), |acc, v| acc + v.coords);
        Point3::from(sum / n)
    }
}

/// Same vertex count and identical face lists, in order.
pub fn same_topology(a: &TriangleMesh, b: &TriangleMesh) -> bool {
    a.vertices.len() == b.vertices.len() && a.faces == b.faces
}

/// Vertex `i` becomes `(1 - t) a_i + t b_i`; faces and uvs come from `a` and
/// normals are recomputed.
pub fn interpolate_mesh(
    a: &TriangleMesh,
    b: &TriangleMesh,
    t: f64,
) -> Result<TriangleMesh, MeshError> {
    if !interp::valid_factor(t) {
        return Err(MeshError::FactorOutOfRange(t));
    }
    if !same_topology(a, b) {
        return Err(MeshError::TopologyMismatch);
    }
    if let Some(i) = a
        .uvs
        .iter()
        .zip(&b.uvs)
        .position(|(p, q)| (p.x - q.x).abs() > UV_TOLERANCE || (p.y - q.y).abs() > UV_TOLERANCE)
    {
        return Err(MeshError::UvMismatch(i));
    }
    let (wa, wb) = interp::weights(t);
    let vertices: Vec<Point3> = a
        .vertices
        .iter()
        .zip(&b.vertices)
        .map(|(p, q)| {
            Point3::new(
                interp::blend(p.x, q.x, wa, wb),
                interp::blend(p.y, q.y, wa, wb),
                interp::blend(p.z, q.z, wa, wb),
            )
        })
        .collect();
    let normals = vertex_normals(&vertices, &a.faces);
    Ok(TriangleMesh {
        vertices,
        uvs: a.uvs.clone(),
        faces: a.faces.clone(),
        normals: Some(normals),
    })
}

/// Area-weighted vertex normals. Vertices with no usable incident area get
/// `(0, 0, 1)`.
pub fn compute_vertex_normals(mesh: &TriangleMesh) -> TriangleMesh {
    TriangleMesh {
        normals: Some(vertex_normals(&mesh.vertices, &mesh.faces)),
        ..mesh.clone()
    }
}

fn vertex_normals(vertices: &[Point3], faces: &[[u32; 3]]) -> Vec<Vector3> {
    let mut acc = vec![Vector3::zeros(); vertices.len()];
    for f in faces {
        let [a, b, c] = f.map(|i| vertices[i as usize]);
        // twice the face area times the unit normal
        let n = (b - a).cross(&(c - a));
        for &i in f {
            acc[i as usize] += n;
        }
    }
    let mut fallback = 0usize;
    let normals: Vec<Vector3> = acc
        .into_iter()
        .map(|n| match n.try_normalize(0.0) {
            Some(u) if u.iter().all(|c| c.is_finite()) => u,
            _ => {
                fallback += 1;
                Vector3::z()
            }
        })
        .collect();
    if fallback > 0 {
        warn!("{fallback} vertices have no incident face area; using (0, 0, 1) as their normal");
    }
    normals
}
