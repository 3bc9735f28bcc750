use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;

use super::{ModelSource, MorphSpace, PipelineConfig, PipelineError};
use crate::fitting::{
    extract_texture, fit_from_photo_landmarks, photo_landmarks_to_texture, synthesize_model,
    FitOptions, FitResult, MorphableModel,
};
use crate::landmarks::{add_boundary_anchors, parse_pts, LandmarkSet};
use crate::mesh::interpolate_mesh;
use crate::morph::{build_correspondence, warp_blend, MorphMapping};
use crate::raster::{load_image, save_image, Image};
use crate::render::{rasterize, RenderCamera, RenderParams};

/// Inclusive schedule `t_start + k·t_step`; the last value is snapped to
/// `t_end` when it lands within rounding of it.
pub fn frame_schedule(t_start: f64, t_end: f64, t_step: f64) -> Vec<f64> {
    let n = ((t_end - t_start) / t_step + 1e-9).floor() as usize + 1;
    (0..n)
        .map(|k| {
            let t = t_start + k as f64 * t_step;
            if k == n - 1 && (t - t_end).abs() < 1e-9 {
                t_end
            } else {
                t.min(t_end)
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameRecord {
    pub index: usize,
    pub t: f64,
    pub file: String,
    pub ms: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub config: PipelineConfig,
    pub frames: Vec<FrameRecord>,
    pub complete: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

/// What each frame morphs and where it comes from.
enum Source {
    Texture {
        tex_a: Image,
        tex_b: Image,
        mapping: MorphMapping,
    },
    Photo {
        photo_a: Image,
        photo_b: Image,
        mapping: MorphMapping,
    },
}

fn at<E: Into<super::BoxError>>(stage: &'static str, t: f64) -> impl FnOnce(E) -> PipelineError {
    move |e| PipelineError::stage(stage, Some(t), e)
}

fn load_landmarks(path: &Path, image: &Image) -> Result<LandmarkSet, PipelineError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| PipelineError::stage("load landmarks", None, e))?;
    parse_pts(&text)
        .and_then(|lm| lm.with_image_size(image.width(), image.height()))
        .map_err(|e| {
            PipelineError::stage("load landmarks", None, format!("{}: {e}", path.display()))
        })
}

fn load_model(source: &ModelSource) -> Result<MorphableModel, PipelineError> {
    match source {
        ModelSource::File(p) => {
            MorphableModel::load(p).map_err(|e| PipelineError::stage("load model", None, e))
        }
        ModelSource::Synthetic {
            seed,
            components,
            vertices,
        } => synthesize_model(*seed, *components, *vertices)
            .map_err(|e| PipelineError::stage("load model", None, e)),
    }
}

fn morph_landmarks(lm: &LandmarkSet) -> Result<LandmarkSet, PipelineError> {
    lm.nudged_inward()
        .and_then(|n| add_boundary_anchors(&n))
        .map_err(|e| PipelineError::stage("correspondence", None, e))
}

/// Fits both faces, prepares the morph, and writes one frame per scheduled
/// `t` plus `manifest.json` into the output directory.
///
/// Frames are rendered in parallel. If any frame fails, the frames that did
/// succeed stay on disk and the manifest is written with `complete: false`.
pub fn run_animation(config: &PipelineConfig) -> Result<Vec<PathBuf>, PipelineError> {
    let out_dir = &config.output_dir;
    std::fs::create_dir_all(out_dir).map_err(|source| PipelineError::Output {
        path: out_dir.clone(),
        source,
    })?;

    let model = load_model(&config.model)?;
    let load = |p: &Path| load_image(p).map_err(|e| PipelineError::stage("load photo", None, e));
    let photo_a = load(&config.photo_a)?;
    let mut photo_b = load(&config.photo_b)?;
    let lm_a = load_landmarks(&config.landmarks_a, &photo_a)?;
    let mut lm_b = load_landmarks(&config.landmarks_b, &photo_b)?;

    let options = FitOptions {
        lambda: config.lambda,
        iterations: config.iterations,
        ..FitOptions::default()
    };
    let fit = |lm: &LandmarkSet, stage| -> Result<FitResult, PipelineError> {
        let r = fit_from_photo_landmarks(&model, lm, &options)
            .map_err(|e| PipelineError::stage(stage, None, e))?;
        info!(
            "{stage}: reprojection RMSE {:.3} px",
            r.rmse_history.last().copied().unwrap_or(f64::NAN)
        );
        Ok(r)
    };
    let fit_a = fit(&lm_a, "fit A")?;
    let fit_b = fit(&lm_b, "fit B")?;

    let size = config.render.texture_size;
    let source = match config.morph_space {
        MorphSpace::Texture => {
            let texture = |f: &FitResult, photo: &Image, lm: &LandmarkSet| {
                let tex = extract_texture(&f.mesh, &f.camera, photo, size)
                    .map_err(|e| PipelineError::stage("texture", None, e))?;
                let tex_lm = photo_landmarks_to_texture(
                    &f.mesh,
                    &f.camera,
                    lm,
                    &model.landmark_vertex_ids,
                    size,
                )
                .map_err(|e| PipelineError::stage("texture", None, e))?;
                Ok::<_, PipelineError>((tex, tex_lm))
            };
            let (tex_a, tex_lm_a) = texture(&fit_a, &photo_a, &lm_a)?;
            let (tex_b, tex_lm_b) = texture(&fit_b, &photo_b, &lm_b)?;
            let mapping =
                build_correspondence(&morph_landmarks(&tex_lm_a)?, &morph_landmarks(&tex_lm_b)?)
                    .map_err(|e| PipelineError::stage("correspondence", None, e))?;
            Source::Texture {
                tex_a,
                tex_b,
                mapping,
            }
        }
        MorphSpace::Photo => {
            if photo_b.dimensions() != photo_a.dimensions() {
                warn!(
                    "resizing photo B from {:?} to {:?} for photo-space morphing",
                    photo_b.dimensions(),
                    photo_a.dimensions()
                );
                let (w, h) = photo_a.dimensions();
                photo_b = photo_b
                    .resized(w, h)
                    .map_err(|e| PipelineError::stage("correspondence", None, e))?;
                lm_b = lm_b
                    .rescaled(w, h)
                    .map_err(|e| PipelineError::stage("correspondence", None, e))?;
            }
            let mapping = build_correspondence(&morph_landmarks(&lm_a)?, &morph_landmarks(&lm_b)?)
                .map_err(|e| PipelineError::stage("correspondence", None, e))?;
            Source::Photo {
                photo_a,
                photo_b,
                mapping,
            }
        }
    };

    let mut params = RenderParams::new(config.render.width, config.render.height);
    params.view = config.render.view;
    params.material = config.render.material();
    params.camera = RenderCamera::framing(
        &[&fit_a.mesh, &fit_b.mesh],
        params.view,
        params.width,
        params.height,
    );

    let schedule = frame_schedule(config.t_start, config.t_end, config.t_step);
    let results: Vec<Result<FrameRecord, PipelineError>> = schedule
        .par_iter()
        .enumerate()
        .map(|(index, &t)| {
            let start = Instant::now();
            let mesh =
                interpolate_mesh(&fit_a.mesh, &fit_b.mesh, t).map_err(at("interpolate", t))?;
            let texture = match &source {
                Source::Texture {
                    tex_a,
                    tex_b,
                    mapping,
                } => warp_blend(tex_a, tex_b, mapping, t).map_err(at("morph", t))?,
                Source::Photo {
                    photo_a,
                    photo_b,
                    mapping,
                } => {
                    let photo = warp_blend(photo_a, photo_b, mapping, t).map_err(at("morph", t))?;
                    let camera = fit_a
                        .camera
                        .lerp(&fit_b.camera, t)
                        .map_err(at("texture", t))?;
                    extract_texture(&mesh, &camera, &photo, size).map_err(at("texture", t))?
                }
            };
            let frame = rasterize(&mesh, &texture, &params).map_err(at("render", t))?;
            let file = format!("frame_{index:03}.png");
            save_image(&frame, out_dir.join(&file)).map_err(at("write frame", t))?;
            Ok(FrameRecord {
                index,
                t,
                file,
                ms: start.elapsed().as_secs_f64() * 1e3,
            })
        })
        .collect();

    let mut frames = Vec::with_capacity(results.len());
    let mut first_error = None;
    for r in results {
        match r {
            Ok(rec) => frames.push(rec),
            Err(e) if first_error.is_none() => first_error = Some(e),
            Err(_) => {}
        }
    }
    let manifest = Manifest {
        config: config.clone(),
        frames,
        complete: first_error.is_none(),
        error: first_error.as_ref().map(ToString::to_string),
    };
    let manifest_path = out_dir.join(MANIFEST_FILE);
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(&manifest_path, json).map_err(|source| PipelineError::Output {
        path: manifest_path,
        source,
    })?;
    if let Some(e) = first_error {
        return Err(e);
    }
    Ok(manifest
        .frames
        .iter()
        .map(|f| out_dir.join(&f.file))
        .collect())
}
