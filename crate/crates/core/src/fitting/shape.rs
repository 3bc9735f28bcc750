use log::warn;
use nalgebra::{DMatrix, DVector, Vector2};

use super::camera::{normalizing_transform2, reprojection_rmse};
use super::ShapeCoefficients;
use super::{estimate_affine_camera, instance_mesh, AffineCamera, FitError, MorphableModel};
use crate::landmarks::LandmarkSet;
use crate::mesh::TriangleMesh;
use crate::Point2;

/// Default bound on `|alpha_k|`.
pub const DEFAULT_COEFFICIENT_CAP: f64 = 4.0;
const SINGULAR_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Ridge weight, applied in the normalized landmark frame.
    pub lambda: f64,
    pub iterations: usize,
    pub coefficient_cap: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            lambda: 0.1,
            iterations: 3,
            coefficient_cap: DEFAULT_COEFFICIENT_CAP,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FitResult {
    /// Camera in the pixel frame of the input landmarks.
    pub camera: AffineCamera,
    pub coefficients: ShapeCoefficients,
    pub mesh: TriangleMesh,
    /// Reprojection RMSE in pixels after each iteration.
    pub rmse_history: Vec<f64>,
    /// Data term plus ridge penalty, in the normalized frame, after each
    /// iteration.
    pub objective_history: Vec<f64>,
}

/// Ridge-regularized shape fit with the default coefficient cap.
///
/// Minimizes `Σ‖P·(mean_i + B_i·diag(sigma)·alpha) − x_i‖² + lambda·‖alpha‖²`
/// over the landmark vertices.
pub fn fit_shape(
    model: &MorphableModel,
    camera: &AffineCamera,
    landmarks2d: &[Point2],
    lambda: f64,
) -> Result<ShapeCoefficients, FitError> {
    fit_shape_capped(model, camera, landmarks2d, lambda, DEFAULT_COEFFICIENT_CAP)
}

pub fn fit_shape_capped(
    model: &MorphableModel,
    camera: &AffineCamera,
    landmarks2d: &[Point2],
    lambda: f64,
    cap: f64,
) -> Result<ShapeCoefficients, FitError> {
    let ids = &model.landmark_vertex_ids;
    if landmarks2d.len() != ids.len() {
        return Err(FitError::LandmarkCount {
            expected: ids.len(),
            got: landmarks2d.len(),
        });
    }
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(FitError::InvalidOption(format!(
            "lambda must be >= 0, got {lambda}"
        )));
    }
    let k = model.component_count();
    let linear = camera.linear();
    let offset = camera.translation();

    let mut design = DMatrix::zeros(2 * ids.len(), k);
    let mut target = DVector::zeros(2 * ids.len());
    for (row, (&v, x)) in ids.iter().zip(landmarks2d).enumerate() {
        let mean = model.mean.fixed_rows::<3>(3 * v);
        let basis = model.basis.rows(3 * v, 3);
        // rows of P·B_v·diag(sigma)
        let projected = linear * basis;
        for c in 0..k {
            design[(2 * row, c)] = projected[(0, c)] * model.sigma[c];
            design[(2 * row + 1, c)] = projected[(1, c)] * model.sigma[c];
        }
        let base: Vector2<f64> = linear * mean + offset;
        target[2 * row] = x.x - base.x;
        target[2 * row + 1] = x.y - base.y;
    }

    if lambda == 0.0 {
        let sv = design.singular_values();
        if design.nrows() < k || !(sv.min() > SINGULAR_TOLERANCE * sv.max()) {
            return Err(FitError::SingularShapeSystem);
        }
    }
    let mut normal = design.tr_mul(&design);
    for i in 0..k {
        normal[(i, i)] += lambda;
    }
    let rhs = design.tr_mul(&target);
    let alpha = normal
        .cholesky()
        .ok_or(FitError::SingularShapeSystem)?
        .solve(&rhs);

    let over = alpha.iter().filter(|a| a.abs() > cap).count();
    let alpha = if over > 0 {
        warn!("{over} shape coefficients exceed the cap of {cap} and were clamped");
        alpha.map(|a| a.clamp(-cap, cap))
    } else {
        alpha
    };
    Ok(ShapeCoefficients(alpha))
}

/// Alternates camera estimation and shape fitting, starting from the mean
/// shape.
///
/// Landmarks are first moved to a zero-mean frame with RMS distance √2; the
/// ridge weight applies in that frame, and the returned camera maps back to
/// pixels.
pub fn fit_from_photo_landmarks(
    model: &MorphableModel,
    landmarks: &LandmarkSet,
    options: &FitOptions,
) -> Result<FitResult, FitError> {
    let expected = model.landmark_vertex_ids.len();
    if landmarks.len() != expected {
        return Err(FitError::LandmarkCount {
            expected,
            got: landmarks.len(),
        });
    }
    if options.iterations == 0 {
        return Err(FitError::InvalidOption("iterations must be >= 1".into()));
    }
    let (centre, scale) = normalizing_transform2(&landmarks.points);
    let normalized: Vec<Point2> = landmarks
        .points
        .iter()
        .map(|p| Point2::from((p.coords - centre) * scale))
        .collect();

    let mut alpha = lifted_start(model, &normalized, options.coefficient_cap)
        .unwrap_or_else(|| ShapeCoefficients::zeros(model.component_count()));
    let mut camera = None;
    let mut rmse_history = Vec::with_capacity(options.iterations);
    let mut objective_history = Vec::with_capacity(options.iterations);
    for _ in 0..options.iterations {
        let points3d = model.landmark_positions(&alpha)?;
        let cam = estimate_affine_camera(&normalized, &points3d)?;
        alpha = fit_shape_capped(
            model,
            &cam,
            &normalized,
            options.lambda,
            options.coefficient_cap,
        )?;
        let fitted = model.landmark_positions(&alpha)?;
        let rmse = reprojection_rmse(&cam, &fitted, &normalized);
        let data = rmse * rmse * normalized.len() as f64;
        objective_history.push(data + options.lambda * alpha.0.norm_squared());
        rmse_history.push(rmse / scale);
        camera = Some(cam);
    }
    let normalized_camera = camera.expect("at least one iteration");
    let mut matrix = normalized_camera.matrix() / scale;
    matrix[(0, 3)] += centre.x;
    matrix[(1, 3)] += centre.y;
    let camera = AffineCamera::new(matrix)?;
    let mesh = instance_mesh(model, &alpha)?;
    Ok(FitResult {
        camera,
        coefficients: alpha,
        mesh,
        rmse_history,
        objective_history,
    })
}

/// Starting coefficients from the linear problem obtained by treating each
/// product `alpha_k · P` as a free 2x3 block.
///
/// With the camera's linear part `A`, landmark `i` satisfies
/// `x_i = A·m_i + t + Σ_k (alpha_k·A)·b_ik`, which is linear in `A`, `t` and
/// the blocks `W_k = alpha_k·A`. Each `alpha_k` is then the projection of
/// `W_k` onto `A`. Noiseless input is solved exactly; `None` when the lifted
/// system is rank deficient or the start is worse than the mean shape.
fn lifted_start(
    model: &MorphableModel,
    landmarks: &[Point2],
    cap: f64,
) -> Option<ShapeCoefficients> {
    let ids = &model.landmark_vertex_ids;
    let k = model.component_count();
    let cols = 4 + 3 * k;
    if ids.len() < cols {
        return None;
    }
    let mut design = DMatrix::zeros(ids.len(), cols);
    let mut rhs = DMatrix::zeros(ids.len(), 2);
    for (row, (&v, x)) in ids.iter().zip(landmarks).enumerate() {
        for d in 0..3 {
            design[(row, d)] = model.mean[3 * v + d];
            for c in 0..k {
                design[(row, 4 + 3 * c + d)] = model.basis[(3 * v + d, c)] * model.sigma[c];
            }
        }
        design[(row, 3)] = 1.0;
        rhs[(row, 0)] = x.x;
        rhs[(row, 1)] = x.y;
    }
    let svd = design.svd(true, true);
    if !(svd.singular_values.min() > SINGULAR_TOLERANCE * svd.singular_values.max()) {
        return None;
    }
    let sol = svd.solve(&rhs, 0.0).ok()?;
    let linear = sol.rows(0, 3);
    let norm = linear.norm_squared();
    if !(norm > 0.0) {
        return None;
    }
    let alpha = DVector::from_fn(k, |c, _| {
        let w = sol.rows(4 + 3 * c, 3);
        (w.dot(&linear) / norm).clamp(-cap, cap)
    });
    let alpha = ShapeCoefficients(alpha);

    let rmse_of = |a: &ShapeCoefficients| -> Option<f64> {
        let pts = model.landmark_positions(a).ok()?;
        let cam = estimate_affine_camera(landmarks, &pts).ok()?;
        Some(reprojection_rmse(&cam, &pts, landmarks))
    };
    let lifted = rmse_of(&alpha)?;
    match rmse_of(&ShapeCoefficients::zeros(k)) {
        Some(mean) if mean < lifted => None,
        _ => Some(alpha),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fitting::synthesize_model;
    use nalgebra::Matrix2x4;

    fn camera() -> AffineCamera {
        AffineCamera::new(Matrix2x4::new(
            180.0, 10.0, -5.0, 250.0, -8.0, -175.0, 12.0, 260.0,
        ))
        .unwrap()
    }

    fn project(
        model: &MorphableModel,
        alpha: &ShapeCoefficients,
        cam: &AffineCamera,
    ) -> Vec<Point2> {
        model
            .landmark_positions(alpha)
            .unwrap()
            .iter()
            .map(|p| cam.project(p))
            .collect()
    }

    #[test]
    fn mean_shape_projections_give_zero_alpha() {
        let model = synthesize_model(3, 10, 800).unwrap();
        let cam = camera();
        let lm = project(&model, &ShapeCoefficients::zeros(10), &cam);
        for lambda in [0.0, 0.1, 10.0] {
            let alpha = fit_shape(&model, &cam, &lm, lambda).unwrap();
            assert!(
                alpha.max_abs() < 1e-9,
                "lambda {lambda}: {}",
                alpha.max_abs()
            );
        }
    }

    #[test]
    fn huge_lambda_shrinks_to_zero() {
        let model = synthesize_model(3, 10, 800).unwrap();
        let cam = camera();
        let truth =
            ShapeCoefficients::from_slice(&[1.0, -1.0, 0.5, 0.0, 2.0, 0.3, -0.7, 1.1, 0.0, -2.0]);
        let lm = project(&model, &truth, &cam);
        let alpha = fit_shape(&model, &cam, &lm, 1e12).unwrap();
        assert!(alpha.max_abs() < 1e-6);
    }

    #[test]
    fn coefficients_are_clamped() {
        let model = synthesize_model(3, 4, 400).unwrap();
        let cam = camera();
        let truth = ShapeCoefficients::from_slice(&[9.0, 0.0, 0.0, 0.0]);
        let lm = project(&model, &truth, &cam);
        let alpha = fit_shape(&model, &cam, &lm, 0.0).unwrap();
        assert_eq!(alpha.0[0], DEFAULT_COEFFICIENT_CAP);
    }

    #[test]
    fn singular_system_without_ridge() {
        let mut model = synthesize_model(3, 4, 400).unwrap();
        // only one landmark: 2 equations for 4 unknowns
        model.landmark_vertex_ids.truncate(1);
        let cam = camera();
        let lm = vec![Point2::new(10.0, 10.0)];
        assert!(matches!(
            fit_shape(&model, &cam, &lm, 0.0),
            Err(FitError::SingularShapeSystem)
        ));
        assert!(fit_shape(&model, &cam, &lm, 0.1).is_ok());
    }

    #[test]
    fn wrong_landmark_count() {
        let model = synthesize_model(3, 4, 400).unwrap();
        assert!(matches!(
            fit_shape(&model, &camera(), &[Point2::origin(); 5], 0.1),
            Err(FitError::LandmarkCount {
                expected: 68,
                got: 5
            })
        ));
        let lm = LandmarkSet::new(vec![Point2::origin(); 10]);
        assert!(fit_from_photo_landmarks(&model, &lm, &FitOptions::default()).is_err());
    }
}
