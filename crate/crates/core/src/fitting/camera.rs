use nalgebra::{DMatrix, Matrix2x3, Matrix2x4, Matrix4, Vector2, Vector4};

use super::FitError;
use crate::{Point2, Point3, Vector3};

/// Relative singular-value floor below which a system is rank deficient.
const RANK_TOLERANCE: f64 = 1e-10;

/// 2x4 affine projection from homogeneous model points to pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineCamera {
    matrix: Matrix2x4<f64>,
}

impl AffineCamera {
    /// Wraps `matrix`, requiring its left 2x3 block to have rank 2.
    pub fn new(matrix: Matrix2x4<f64>) -> Result<Self, FitError> {
        let block: Matrix2x3<f64> = matrix.fixed_view::<2, 3>(0, 0).into_owned();
        let sv = block.singular_values();
        if !(sv.min() > RANK_TOLERANCE * sv.max()) {
            return Err(FitError::RankDeficient(
                "camera's linear part must have rank 2".into(),
            ));
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &Matrix2x4<f64> {
        &self.matrix
    }

    pub fn linear(&self) -> Matrix2x3<f64> {
        self.matrix.fixed_view::<2, 3>(0, 0).into_owned()
    }

    pub fn translation(&self) -> Vector2<f64> {
        self.matrix.column(3).into_owned()
    }

    pub fn project(&self, p: &Point3) -> Point2 {
        Point2::from(self.linear() * p.coords + self.translation())
    }

    /// Unit vector along the viewing rays, pointing away from the viewer
    /// for a camera whose image `y` axis points down.
    pub fn view_direction(&self) -> Vector3 {
        let r1: Vector3 = self.matrix.fixed_view::<1, 3>(0, 0).transpose();
        let r2: Vector3 = self.matrix.fixed_view::<1, 3>(1, 0).transpose();
        r1.cross(&r2).normalize()
    }

    /// Depth along [`AffineCamera::view_direction`]; smaller is nearer.
    pub fn depth(&self, p: &Point3) -> f64 {
        self.view_direction().dot(&p.coords)
    }

    /// Element-wise blend of two cameras.
    pub fn lerp(&self, other: &AffineCamera, t: f64) -> Result<AffineCamera, FitError> {
        let (wa, wb) = crate::interp::weights(t);
        let m = self
            .matrix
            .zip_map(&other.matrix, |a, b| crate::interp::blend(a, b, wa, wb));
        AffineCamera::new(m)
    }
}

/// Centroid and scale taking `points` to zero mean and RMS distance √2.
pub(crate) fn normalizing_transform2(points: &[Point2]) -> (Vector2<f64>, f64) {
    let n = points.len() as f64;
    let c = points
        .iter()
        .fold(Vector2::zeros(), |acc, p| acc + p.coords)
        / n;
    let rms = (points
        .iter()
        .map(|p| (p.coords - c).norm_squared())
        .sum::<f64>()
        / n)
        .sqrt();
    let s = if rms > 0.0 { 2f64.sqrt() / rms } else { 1.0 };
    (c, s)
}

fn normalizing_transform3(points: &[Point3]) -> (Vector3, f64) {
    let n = points.len() as f64;
    let c = points
        .iter()
        .fold(Vector3::zeros(), |acc, p| acc + p.coords)
        / n;
    let rms = (points
        .iter()
        .map(|p| (p.coords - c).norm_squared())
        .sum::<f64>()
        / n)
        .sqrt();
    let s = if rms > 0.0 { 3f64.sqrt() / rms } else { 1.0 };
    (c, s)
}

/// Least-squares affine camera from 2D-3D correspondences.
///
/// Both point sets are normalized (zero mean; RMS distance √2 in 2D and √3 in
/// 3D), each image row is solved independently against the shared design
/// matrix `[X̃ 1]`, and the result is denormalized.
pub fn estimate_affine_camera(
    points2d: &[Point2],
    points3d: &[Point3],
) -> Result<AffineCamera, FitError> {
    if points2d.len() != points3d.len() {
        return Err(FitError::CorrespondenceCount(
            points2d.len(),
            points3d.len(),
        ));
    }
    if points2d.len() < 4 {
        return Err(FitError::TooFewCorrespondences(points2d.len()));
    }
    let n = points2d.len();
    let (c2, s2) = normalizing_transform2(points2d);
    let (c3, s3) = normalizing_transform3(points3d);

    let mut design = DMatrix::zeros(n, 4);
    let mut rhs = DMatrix::zeros(n, 2);
    for i in 0..n {
        let x = (points3d[i].coords - c3) * s3;
        design[(i, 0)] = x.x;
        design[(i, 1)] = x.y;
        design[(i, 2)] = x.z;
        design[(i, 3)] = 1.0;
        let u = (points2d[i].coords - c2) * s2;
        rhs[(i, 0)] = u.x;
        rhs[(i, 1)] = u.y;
    }
    let svd = design.svd(true, true);
    let (smax, smin) = (svd.singular_values.max(), svd.singular_values.min());
    if !(smin > RANK_TOLERANCE * smax) {
        return Err(FitError::RankDeficient(
            "3D points are coplanar or degenerate".into(),
        ));
    }
    let solution = svd
        .solve(&rhs, 0.0)
        .map_err(|e| FitError::RankDeficient(e.to_string()))?;

    // normalized camera as a 3x4 with a [0 0 0 1] bottom row
    let mut normalized = Matrix4::<f64>::zeros();
    for row in 0..2 {
        for col in 0..4 {
            normalized[(row, col)] = solution[(col, row)];
        }
    }
    let mut t3 = Matrix4::<f64>::identity() * s3;
    t3[(3, 3)] = 1.0;
    t3.fixed_view_mut::<3, 1>(0, 3).copy_from(&(-c3 * s3));

    let full = normalized * t3;
    let mut p: Matrix2x4<f64> = full.fixed_view::<2, 4>(0, 0) / s2;
    // undo the 2D centring
    p[(0, 3)] += c2.x;
    p[(1, 3)] += c2.y;
    AffineCamera::new(p)
}

pub(crate) fn homogeneous(p: &Point3) -> Vector4<f64> {
    Vector4::new(p.x, p.y, p.z, 1.0)
}

/// Root-mean-square 2D distance between projections and targets.
pub fn reprojection_rmse(camera: &AffineCamera, points3d: &[Point3], points2d: &[Point2]) -> f64 {
    let sum: f64 = points3d
        .iter()
        .zip(points2d)
        .map(|(x, u)| (camera.matrix * homogeneous(x) - u.coords).norm_squared())
        .sum();
    (sum / points2d.len().max(1) as f64).sqrt()
}
