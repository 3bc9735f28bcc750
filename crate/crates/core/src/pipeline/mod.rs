//! End-to-end animation and the mesh interpolation benchmark.

mod animate;
mod bench;
mod config;

use std::path::PathBuf;

use thiserror::Error;

pub use animate::{frame_schedule, run_animation, FrameRecord, Manifest};
pub use bench::{run_bench, BenchReport, BenchRow, BENCH_WARMUP};
pub use config::{
    parse_config, ConfigOverrides, ModelSource, MorphSpace, PipelineConfig, RenderSettings,
};

type BoxError = Box<dyn std::error::Error + Send + Sync>;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),
    #[error("{stage} failed{}: {source}", at_t(*.t))]
    Stage {
        stage: &'static str,
        t: Option<f64>,
        source: BoxError,
    },
    #[error("cannot write {path}: {source}")]
    Output {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("benchmark: {0}")]
    Bench(String),
}

fn at_t(t: Option<f64>) -> String {
    t.map(|t| format!(" at t = {t}")).unwrap_or_default()
}

impl PipelineError {
    pub(crate) fn stage(stage: &'static str, t: Option<f64>, source: impl Into<BoxError>) -> Self {
        PipelineError::Stage {
            stage,
            t,
            source: source.into(),
        }
    }
}
