use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::layout::ibug_parameters;
use super::FitError;
use crate::mesh::TriangleMesh;
use crate::{Point2, Point3};

const MAGIC: &[u8; 5] = b"MKMM1";
/// Bumps summed into each synthetic deformation component.
const BUMPS_PER_COMPONENT: usize = 6;
/// RMS per-vertex displacement of a one-sigma step along the first component.
const FIRST_COMPONENT_RMS: f64 = 0.04;
const SIGMA_DECAY: f64 = 0.8;

/// Shape coefficients in units of each component's standard deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeCoefficients(pub DVector<f64>);

impl ShapeCoefficients {
    pub fn zeros(k: usize) -> Self {
        Self(DVector::zeros(k))
    }

    pub fn from_slice(values: &[f64]) -> Self {
        Self(DVector::from_column_slice(values))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.amax()
    }
}

/// Mean shape plus an orthonormal PCA basis.
///
/// `mean` stacks `x, y, z` per vertex. Instances are
/// `mean + basis * diag(sigma) * alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct MorphableModel {
    pub mean: DVector<f64>,
    pub basis: DMatrix<f64>,
    pub sigma: DVector<f64>,
    pub faces: Vec<[u32; 3]>,
    pub uvs: Vec<Point2>,
    pub landmark_vertex_ids: Vec<usize>,
    pub seed: Option<u64>,
}

impl MorphableModel {
    pub fn vertex_count(&self) -> usize {
        self.mean.len() / 3
    }

    pub fn component_count(&self) -> usize {
        self.basis.ncols()
    }

    /// Largest deviation of `basisᵀ·basis` from the identity.
    pub fn orthonormality_error(&self) -> f64 {
        let gram = self.basis.tr_mul(&self.basis);
        let k = gram.nrows();
        (gram - DMatrix::identity(k, k)).amax()
    }

    /// Checks the structural invariants.
    pub fn validate(&self) -> Result<(), FitError> {
        let v = self.vertex_count();
        let bad = |m: &str| Err(FitError::InvalidModel(m.to_string()));
        if self.mean.len() != 3 * v || v == 0 {
            return bad("mean length is not a positive multiple of 3");
        }
        if self.basis.nrows() != 3 * v || self.sigma.len() != self.basis.ncols() {
            return bad("basis and sigma shapes disagree with the mean");
        }
        if self.sigma.iter().any(|s| !(*s > 0.0)) {
            return bad("sigma entries must be positive");
        }
        if self.uvs.len() != v {
            return bad("need one uv per vertex");
        }
        if self.faces.iter().flatten().any(|&i| i as usize >= v) {
            return bad("face index out of range");
        }
        let mut ids = self.landmark_vertex_ids.clone();
        ids.sort_unstable();
        ids.dedup();
        if ids.len() != self.landmark_vertex_ids.len() || ids.last().is_some_and(|&i| i >= v) {
            return bad("landmark vertex ids must be distinct and in range");
        }
        if self.orthonormality_error() > 1e-9 {
            return bad("basis columns are not orthonormal");
        }
        Ok(())
    }

    /// The stacked shape vector for `alpha`.
    pub fn shape_vector(&self, alpha: &ShapeCoefficients) -> Result<DVector<f64>, FitError> {
        if alpha.len() != self.component_count() {
            return Err(FitError::CoefficientCount {
                expected: self.component_count(),
                got: alpha.len(),
            });
        }
        let scaled = alpha.0.component_mul(&self.sigma);
        Ok(&self.mean + &self.basis * scaled)
    }

    /// Positions of the landmark vertices for `alpha`, without building the
    /// whole mesh.
    pub fn landmark_positions(&self, alpha: &ShapeCoefficients) -> Result<Vec<Point3>, FitError> {
        if alpha.len() != self.component_count() {
            return Err(FitError::CoefficientCount {
                expected: self.component_count(),
                got: alpha.len(),
            });
        }
        let scaled = alpha.0.component_mul(&self.sigma);
        Ok(self
            .landmark_vertex_ids
            .iter()
            .map(|&v| {
                let mut p = [0.0; 3];
                for (axis, slot) in p.iter_mut().enumerate() {
                    let row = 3 * v + axis;
                    *slot = self.mean[row] + self.basis.row(row).dot(&scaled.transpose());
                }
                Point3::new(p[0], p[1], p[2])
            })
            .collect())
    }

    /// Writes the binary container and a `.json` sidecar next to it.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), FitError> {
        let path = path.as_ref();
        let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
        file.write_all(&self.to_bytes())?;
        file.flush()?;
        let meta = serde_json::json!({
            "K": self.component_count(),
            "V": self.vertex_count(),
            "seed": self.seed,
        });
        std::fs::write(
            sidecar_path(path),
            serde_json::to_string_pretty(&meta).expect("json value serializes"),
        )?;
        Ok(())
    }

    /// Reads a model written by [`MorphableModel::save`]. The sidecar is
    /// optional; when present it supplies the seed and is cross-checked.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, FitError> {
        let path = path.as_ref();
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        let mut model = Self::from_bytes(&bytes)?;
        if let Ok(text) = std::fs::read_to_string(sidecar_path(path)) {
            let meta: serde_json::Value = serde_json::from_str(&text)
                .map_err(|e| FitError::ModelFormat(format!("sidecar: {e}")))?;
            let k = meta.get("K").and_then(|v| v.as_u64());
            let v = meta.get("V").and_then(|v| v.as_u64());
            if k != Some(model.component_count() as u64) || v != Some(model.vertex_count() as u64) {
                return Err(FitError::ModelFormat(
                    "sidecar K/V disagree with the container".into(),
                ));
            }
            model.seed = meta.get("seed").and_then(|v| v.as_u64());
        }
        Ok(model)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let v = self.vertex_count();
        let k = self.component_count();
        let mut out =
            Vec::with_capacity(5 + 16 + 8 * (3 * v * (k + 1) + k + 2 * v) + 12 * self.faces.len());
        out.extend_from_slice(MAGIC);
        for n in [v, k, self.faces.len(), self.landmark_vertex_ids.len()] {
            out.extend_from_slice(&(n as u32).to_le_bytes());
        }
        let mut put = |x: f64| out.extend_from_slice(&x.to_le_bytes());
        self.mean.iter().copied().for_each(&mut put);
        // column-major
        self.basis.iter().copied().for_each(&mut put);
        self.sigma.iter().copied().for_each(&mut put);
        for uv in &self.uvs {
            put(uv.x);
            put(uv.y);
        }
        for i in self.faces.iter().flatten() {
            out.extend_from_slice(&i.to_le_bytes());
        }
        for &i in &self.landmark_vertex_ids {
            out.extend_from_slice(&(i as u32).to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, FitError> {
        let mut r = ByteReader { bytes, pos: 0 };
        if r.take(5)? != MAGIC {
            return Err(FitError::ModelFormat("bad magic, expected MKMM1".into()));
        }
        let v = r.u32()? as usize;
        let k = r.u32()? as usize;
        let f = r.u32()? as usize;
        let l = r.u32()? as usize;
        let expected = 5 + 16 + 8 * (3 * v + 3 * v * k + k + 2 * v) + 4 * (3 * f + l);
        if bytes.len() != expected {
            return Err(FitError::ModelFormat(format!(
                "expected {expected} bytes for V={v} K={k} F={f}, found {}",
                bytes.len()
            )));
        }
        let mean = DVector::from_iterator(3 * v, (0..3 * v).map(|_| r.f64().unwrap()));
        let basis = DMatrix::from_iterator(3 * v, k, (0..3 * v * k).map(|_| r.f64().unwrap()));
        let sigma = DVector::from_iterator(k, (0..k).map(|_| r.f64().unwrap()));
        let uvs = (0..v)
            .map(|_| Point2::new(r.f64().unwrap(), r.f64().unwrap()))
            .collect();
        let faces = (0..f)
            .map(|_| [r.u32().unwrap(), r.u32().unwrap(), r.u32().unwrap()])
            .collect();
        let landmark_vertex_ids = (0..l).map(|_| r.u32().unwrap() as usize).collect();
        let model = Self {
            mean,
            basis,
            sigma,
            faces,
            uvs,
            landmark_vertex_ids,
            seed: None,
        };
        model.validate()?;
        Ok(model)
    }
}

fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

struct ByteReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl ByteReader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8], FitError> {
        let end = self.pos + n;
        let slice = self
            .bytes
            .get(self.pos..end)
            .ok_or_else(|| FitError::ModelFormat("truncated model file".into()))?;
        self.pos = end;
        Ok(slice)
    }

    fn u32(&mut self) -> Result<u32, FitError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, FitError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

/// Grid layout for `n` vertices: `cols` per row, `full_rows` complete rows
/// and a trailing partial row of `rest` vertices.
fn grid_layout(n: usize) -> (usize, usize, usize) {
    let cols = (n as f64).sqrt().ceil() as usize;
    (cols, n / cols, n % cols)
}

fn grid_faces(cols: usize, full_rows: usize, rest: usize) -> Vec<[u32; 3]> {
    let id = |r: usize, c: usize| (r * cols + c) as u32;
    let mut faces = Vec::with_capacity(2 * cols * (full_rows + 1));
    // rows are stored top to bottom; faces wind counter-clockwise seen from +z
    for r in 0..full_rows.saturating_sub(1) {
        for c in 0..cols - 1 {
            faces.push([id(r, c), id(r + 1, c), id(r + 1, c + 1)]);
            faces.push([id(r, c), id(r + 1, c + 1), id(r, c + 1)]);
        }
    }
    if rest > 0 {
        let r = full_rows - 1;
        for c in 0..rest - 1 {
            faces.push([id(r, c), id(r + 1, c), id(r + 1, c + 1)]);
            faces.push([id(r, c), id(r + 1, c + 1), id(r, c + 1)]);
        }
        faces.push([id(r, rest - 1), id(r + 1, rest - 1), id(r, rest)]);
    }
    faces
}

/// Head-like surface: the front of an ellipsoid with a nose ridge.
fn surface_point(u: f64, v: f64) -> [f64; 3] {
    let theta = 1.15 * u;
    let phi = 1.05 * v;
    let nose = 0.12 * (-(u / 0.12).powi(2) - ((v + 0.02) / 0.22).powi(2)).exp();
    [
        0.75 * theta.sin() * phi.cos(),
        phi.sin(),
        0.9 * theta.cos() * phi.cos() + nose,
    ]
}

/// Builds a deterministic synthetic morphable model with `resolution`
/// vertices and `components` PCA components.
pub fn synthesize_model(
    seed: u64,
    components: usize,
    resolution: usize,
) -> Result<MorphableModel, FitError> {
    if components == 0 {
        return Err(FitError::InvalidModel("need at least one component".into()));
    }
    if resolution < 68 {
        return Err(FitError::InvalidModel(format!(
            "resolution {resolution} is below the 68 landmark vertices"
        )));
    }
    if components > 3 * resolution {
        return Err(FitError::InvalidModel(format!(
            "{components} components exceed 3 x {resolution} degrees of freedom"
        )));
    }
    let (cols, full_rows, rest) = grid_layout(resolution);
    let rows = full_rows + usize::from(rest > 0);
    let params: Vec<(f64, f64)> = (0..resolution)
        .map(|i| {
            let (r, c) = (i / cols, i % cols);
            (
                -1.0 + 2.0 * c as f64 / (cols - 1) as f64,
                1.0 - 2.0 * r as f64 / (rows - 1) as f64,
            )
        })
        .collect();

    let mut mean = DVector::zeros(3 * resolution);
    for (i, &(u, v)) in params.iter().enumerate() {
        let p = surface_point(u, v);
        mean.fixed_rows_mut::<3>(3 * i).copy_from_slice(&p);
    }
    let uvs = params
        .iter()
        .map(|&(u, v)| Point2::new((u + 1.0) / 2.0, (v + 1.0) / 2.0))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fields = DMatrix::zeros(3 * resolution, components);
    for k in 0..components {
        let bumps: Vec<([f64; 2], f64, [f64; 3])> = (0..BUMPS_PER_COMPONENT)
            .map(|_| {
                let centre = [rng.random_range(-0.9..0.9), rng.random_range(-0.9..0.9)];
                let width = rng.random_range(0.12..0.5);
                let dir = [
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                ];
                (centre, width, dir)
            })
            .collect();
        for (i, &(u, v)) in params.iter().enumerate() {
            for (centre, width, dir) in &bumps {
                let d2 = (u - centre[0]).powi(2) + (v - centre[1]).powi(2);
                let g = (-d2 / (2.0 * width * width)).exp();
                for axis in 0..3 {
                    fields[(3 * i + axis, k)] += g * dir[axis];
                }
            }
        }
    }
    let basis = orthonormalize(fields)?;

    let sigma0 = FIRST_COMPONENT_RMS * (resolution as f64).sqrt();
    let sigma = DVector::from_iterator(
        components,
        (0..components).map(|k| sigma0 * SIGMA_DECAY.powi(k as i32)),
    );

    let mut used = vec![false; resolution];
    let landmark_vertex_ids = ibug_parameters()
        .into_iter()
        .map(|(lu, lv)| {
            let best = params
                .iter()
                .enumerate()
                .filter(|(i, _)| !used[*i])
                .min_by(|(_, a), (_, b)| {
                    let da = (a.0 - lu).powi(2) + (a.1 - lv).powi(2);
                    let db = (b.0 - lu).powi(2) + (b.1 - lv).powi(2);
                    da.total_cmp(&db)
                })
                .map(|(i, _)| i)
                .expect("resolution >= 68 leaves a free vertex");
            used[best] = true;
            best
        })
        .collect();

    let model = MorphableModel {
        mean,
        basis,
        sigma,
        faces: grid_faces(cols, full_rows, rest),
        uvs,
        landmark_vertex_ids,
        seed: Some(seed),
    };
    model.validate()?;
    Ok(model)
}

/// Thin-QR orthonormalization followed by one Gram-Schmidt refinement pass.
fn orthonormalize(fields: DMatrix<f64>) -> Result<DMatrix<f64>, FitError> {
    let k = fields.ncols();
    let mut q = fields.qr().q();
    for j in 0..k {
        for i in 0..j {
            let proj = q.column(i).dot(&q.column(j));
            let ci = q.column(i).clone_owned();
            q.column_mut(j).axpy(-proj, &ci, 1.0);
        }
        let norm = q.column(j).norm();
        if norm < 1e-6 {
            return Err(FitError::InvalidModel(
                "synthetic deformation fields are linearly dependent".into(),
            ));
        }
        q.column_mut(j).unscale_mut(norm);
    }
    Ok(q)
}

/// Mesh for coefficients `alpha`: `mean + Σ alpha_k sigma_k basis_k`.
pub fn instance_mesh(
    model: &MorphableModel,
    alpha: &ShapeCoefficients,
) -> Result<TriangleMesh, FitError> {
    let shape = model.shape_vector(alpha)?;
    let vertices = shape
        .as_slice()
        .chunks_exact(3)
        .map(|c| Point3::new(c[0], c[1], c[2]))
        .collect();
    Ok(TriangleMesh {
        vertices,
        uvs: model.uvs.clone(),
        faces: model.faces.clone(),
        normals: None,
    })
}
