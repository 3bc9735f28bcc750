use std::fmt::Write as _;
use std::time::Instant;

use super::PipelineError;
use crate::fitting::{instance_mesh, synthesize_model, ShapeCoefficients};
use crate::mesh::interpolate_mesh;

/// Untimed runs before measurement starts.
pub const BENCH_WARMUP: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub vertices: usize,
    pub mean_ms: f64,
    pub std_ms: f64,
    pub iters: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("vertices,mean_ms,std_ms,iters\n");
        for r in &self.rows {
            writeln!(
                out,
                "{},{:.6},{:.6},{}",
                r.vertices, r.mean_ms, r.std_ms, r.iters
            )
            .unwrap();
        }
        out
    }

    pub fn to_table(&self) -> String {
        let mut out = format!(
            "{:>10}  {:>12}  {:>10}  {:>6}\n",
            "vertices", "mean (ms)", "std (ms)", "iters"
        );
        for r in &self.rows {
            writeln!(
                out,
                "{:>10}  {:>12.4}  {:>10.4}  {:>6}",
                r.vertices, r.mean_ms, r.std_ms, r.iters
            )
            .unwrap();
        }
        out
    }
}

/// Times [`interpolate_mesh`] on a pair of synthetic meshes per vertex
/// count. Mesh construction and the warmup runs are not timed.
pub fn run_bench(vertex_counts: &[usize], iterations: usize) -> Result<BenchReport, PipelineError> {
    if iterations < 10 {
        return Err(PipelineError::Bench(format!(
            "need at least 10 iterations, got {iterations}"
        )));
    }
    if vertex_counts.is_empty() || vertex_counts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(PipelineError::Bench(
            "vertex counts must be non-empty and strictly increasing".into(),
        ));
    }
    let mut rows = Vec::with_capacity(vertex_counts.len());
    for &v in vertex_counts {
        let model = synthesize_model(0, 4, v).map_err(|e| PipelineError::Bench(e.to_string()))?;
        let a = instance_mesh(
            &model,
            &ShapeCoefficients::from_slice(&[1.0, -0.5, 0.25, 0.0]),
        )
        .map_err(|e| PipelineError::Bench(e.to_string()))?;
        let b = instance_mesh(
            &model,
            &ShapeCoefficients::from_slice(&[-1.0, 0.5, 0.0, 0.75]),
        )
        .map_err(|e| PipelineError::Bench(e.to_string()))?;
        let run = |k: usize| {
            let t = (k % 11) as f64 / 10.0;
            let mesh = interpolate_mesh(&a, &b, t).expect("meshes share topology");
            std::hint::black_box(mesh);
        };
        for k in 0..BENCH_WARMUP {
            run(k);
        }
        let mut samples = Vec::with_capacity(iterations);
        for k in 0..iterations {
            let start = Instant::now();
            run(k);
            samples.push(start.elapsed().as_secs_f64() * 1e3);
        }
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0);
        rows.push(BenchRow {
            vertices: v,
            mean_ms: mean,
            std_ms: var.sqrt(),
            iters: iterations,
        });
    }
    Ok(BenchReport { rows })
}
