use std::path::{Path, PathBuf};
use std::str::FromStr;

use log::warn;
use serde::Serialize;

use super::PipelineError;
use crate::render::{Material, View};

/// Where the morphable model comes from.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelSource {
    File(PathBuf),
    Synthetic {
        seed: u64,
        components: usize,
        vertices: usize,
    },
}

impl Default for ModelSource {
    fn default() -> Self {
        ModelSource::Synthetic {
            seed: 1,
            components: 10,
            vertices: 3448,
        }
    }
}

impl FromStr for ModelSource {
    type Err = String;

    /// Parses a synthetic model descriptor `seed,K,V`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let [seed, k, v] = parts.as_slice() else {
            return Err(format!("synthetic model '{s}' is not seed,K,V"));
        };
        let bad = |what: &str, value: &str| format!("synthetic model: bad {what} '{value}'");
        Ok(ModelSource::Synthetic {
            seed: seed.parse().map_err(|_| bad("seed", seed))?,
            components: k.parse().map_err(|_| bad("K", k))?,
            vertices: v.parse().map_err(|_| bad("V", v))?,
        })
    }
}

/// Image domain in which the two faces are morphed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MorphSpace {
    Photo,
    /// The uv atlas of the fitted meshes.
    #[default]
    Texture,
}

impl FromStr for MorphSpace {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "photo" => Ok(MorphSpace::Photo),
            "texture" => Ok(MorphSpace::Texture),
            _ => Err(format!(
                "morph_space must be 'photo' or 'texture', got '{s}'"
            )),
        }
    }
}

fn parse_view(s: &str) -> Result<View, String> {
    match s {
        "front" => Ok(View::Front),
        "side" => Ok(View::Side),
        _ => Err(format!("view must be 'front' or 'side', got '{s}'")),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RenderSettings {
    pub width: u32,
    pub height: u32,
    pub texture_size: u32,
    #[serde(serialize_with = "view_name")]
    pub view: View,
    pub ka: f64,
    pub kd: f64,
    pub ks: f64,
    pub shininess: f64,
}

fn view_name<S: serde::Serializer>(view: &View, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(match view {
        View::Front => "front",
        View::Side => "side",
    })
}

impl Default for RenderSettings {
    fn default() -> Self {
        let m = Material::default();
        Self {
            width: 512,
            height: 512,
            texture_size: 512,
            view: View::Front,
            ka: m.ka,
            kd: m.kd,
            ks: m.ks,
            shininess: m.shininess,
        }
    }
}

impl RenderSettings {
    pub fn material(&self) -> Material {
        Material {
            ka: self.ka,
            kd: self.kd,
            ks: self.ks,
            shininess: self.shininess,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineConfig {
    pub photo_a: PathBuf,
    pub photo_b: PathBuf,
    pub landmarks_a: PathBuf,
    pub landmarks_b: PathBuf,
    pub model: ModelSource,
    pub t_start: f64,
    pub t_end: f64,
    pub t_step: f64,
    pub morph_space: MorphSpace,
    pub output_dir: PathBuf,
    pub lambda: f64,
    pub iterations: usize,
    pub render: RenderSettings,
}

/// Values given on the command line; each one replaces the config file's.
#[derive(Debug, Clone, Default)]
pub struct ConfigOverrides {
    pub photo_a: Option<PathBuf>,
    pub photo_b: Option<PathBuf>,
    pub landmarks_a: Option<PathBuf>,
    pub landmarks_b: Option<PathBuf>,
    pub model: Option<PathBuf>,
    /// `seed,K,V`.
    pub synth: Option<String>,
    pub t_start: Option<f64>,
    pub t_end: Option<f64>,
    pub t_step: Option<f64>,
    pub morph_space: Option<MorphSpace>,
    pub output_dir: Option<PathBuf>,
    pub lambda: Option<f64>,
    pub iterations: Option<usize>,
    pub width: Option<u32>,
    pub height: Option<u32>,
    pub texture_size: Option<u32>,
    pub view: Option<View>,
}

const KNOWN_KEYS: &[&str] = &[
    "photo_a",
    "photo_b",
    "landmarks_a",
    "landmarks_b",
    "model",
    "synth",
    "t_start",
    "t_end",
    "t_step",
    "morph_space",
    "output_dir",
    "lambda",
    "iterations",
    "width",
    "height",
    "texture_size",
    "view",
    "ka",
    "kd",
    "ks",
    "shininess",
];

/// Typed lookups into a TOML table that record problems instead of
/// stopping at the first one.
struct Reader<'a> {
    table: &'a toml::Table,
    base: &'a Path,
    errors: &'a mut Vec<String>,
}

impl Reader<'_> {
    fn string(&mut self, key: &str) -> Option<String> {
        match self.table.get(key)? {
            toml::Value::String(s) => Some(s.clone()),
            other => {
                self.errors.push(format!(
                    "{key}: expected a string, got {}",
                    other.type_str()
                ));
                None
            }
        }
    }

    fn path(&mut self, key: &str) -> Option<PathBuf> {
        self.string(key).map(|s| self.base.join(s))
    }

    fn float(&mut self, key: &str) -> Option<f64> {
        match self.table.get(key)? {
            toml::Value::Float(f) => Some(*f),
            toml::Value::Integer(i) => Some(*i as f64),
            other => {
                self.errors.push(format!(
                    "{key}: expected a number, got {}",
                    other.type_str()
                ));
                None
            }
        }
    }

    fn unsigned(&mut self, key: &str) -> Option<u64> {
        match self.table.get(key)? {
            toml::Value::Integer(i) if *i >= 0 => Some(*i as u64),
            other => {
                self.errors.push(format!(
                    "{key}: expected a non-negative integer, got {other}"
                ));
                None
            }
        }
    }

    fn parsed<T>(&mut self, key: &str, parse: impl Fn(&str) -> Result<T, String>) -> Option<T> {
        let s = self.string(key)?;
        parse(&s).map_err(|e| self.errors.push(e)).ok()
    }
}

fn narrow<T: TryFrom<u64>>(value: Option<u64>, key: &str, errors: &mut Vec<String>) -> Option<T> {
    let v = value?;
    T::try_from(v)
        .map_err(|_| errors.push(format!("{key}: {v} is out of range")))
        .ok()
}

/// Reads an optional TOML file, applies `overrides`, fills defaults and
/// validates. Relative paths in the file are resolved against its
/// directory. Unknown keys are logged and ignored; every validation problem
/// is reported together.
pub fn parse_config(
    path: Option<&Path>,
    overrides: &ConfigOverrides,
) -> Result<PipelineConfig, PipelineError> {
    let mut errors = Vec::new();
    let table = match path {
        Some(p) => match std::fs::read_to_string(p) {
            Ok(text) => match text.parse::<toml::Table>() {
                Ok(t) => t,
                Err(e) => return Err(PipelineError::Config(vec![format!("{}: {e}", p.display())])),
            },
            Err(e) => return Err(PipelineError::Config(vec![format!("{}: {e}", p.display())])),
        },
        None => toml::Table::new(),
    };
    for key in table.keys() {
        if !KNOWN_KEYS.contains(&key.as_str()) {
            warn!("ignoring unknown config key '{key}'");
        }
    }
    let base = path
        .and_then(Path::parent)
        .map(Path::to_path_buf)
        .unwrap_or_default();
    let mut r = Reader {
        table: &table,
        base: &base,
        errors: &mut errors,
    };

    let photo_a = overrides.photo_a.clone().or_else(|| r.path("photo_a"));
    let photo_b = overrides.photo_b.clone().or_else(|| r.path("photo_b"));
    let landmarks_a = overrides
        .landmarks_a
        .clone()
        .or_else(|| r.path("landmarks_a"));
    let landmarks_b = overrides
        .landmarks_b
        .clone()
        .or_else(|| r.path("landmarks_b"));
    let output_dir = overrides
        .output_dir
        .clone()
        .or_else(|| r.path("output_dir"));

    let file_model = r.path("model");
    let file_synth = r.parsed("synth", |s| s.parse::<ModelSource>());
    let model = match (&overrides.model, &overrides.synth) {
        (Some(_), Some(_)) => {
            r.errors
                .push("give either a model file or a synthetic model, not both".into());
            None
        }
        (Some(p), None) => Some(ModelSource::File(p.clone())),
        (None, Some(s)) => s.parse().map_err(|e| r.errors.push(e)).ok(),
        (None, None) => match (file_model, file_synth) {
            (Some(_), Some(_)) => {
                r.errors.push("config sets both 'model' and 'synth'".into());
                None
            }
            (Some(p), None) => Some(ModelSource::File(p)),
            (None, synth) => Some(synth.unwrap_or_default()),
        },
    };

    let t_start = overrides
        .t_start
        .or_else(|| r.float("t_start"))
        .unwrap_or(0.0);
    let t_end = overrides.t_end.or_else(|| r.float("t_end")).unwrap_or(1.0);
    let t_step = overrides
        .t_step
        .or_else(|| r.float("t_step"))
        .unwrap_or(0.1);
    let morph_space = overrides
        .morph_space
        .or_else(|| r.parsed("morph_space", |s| s.parse()))
        .unwrap_or_default();
    let lambda = overrides
        .lambda
        .or_else(|| r.float("lambda"))
        .unwrap_or(0.1);
    let iterations = match overrides.iterations {
        Some(i) => Some(i),
        None => {
            let v = r.unsigned("iterations");
            narrow(v, "iterations", r.errors)
        }
    }
    .unwrap_or(3);

    let defaults = RenderSettings::default();
    let mut dim = |over: Option<u32>, key: &str, default: u32| match over {
        Some(v) => v,
        None => {
            let v = r.unsigned(key);
            narrow(v, key, r.errors).unwrap_or(default)
        }
    };
    let width = dim(overrides.width, "width", defaults.width);
    let height = dim(overrides.height, "height", defaults.height);
    let texture_size = dim(
        overrides.texture_size,
        "texture_size",
        defaults.texture_size,
    );
    let view = overrides
        .view
        .or_else(|| r.parsed("view", parse_view))
        .unwrap_or(defaults.view);
    let render = RenderSettings {
        width,
        height,
        texture_size,
        view,
        ka: r.float("ka").unwrap_or(defaults.ka),
        kd: r.float("kd").unwrap_or(defaults.kd),
        ks: r.float("ks").unwrap_or(defaults.ks),
        shininess: r.float("shininess").unwrap_or(defaults.shininess),
    };

    let mut required = |value: Option<PathBuf>, key: &str, must_exist: bool| match value {
        None => {
            errors.push(format!("{key} is required"));
            PathBuf::new()
        }
        Some(p) => {
            if must_exist && !p.exists() {
                errors.push(format!("{key}: {} does not exist", p.display()));
            }
            p
        }
    };
    let photo_a = required(photo_a, "photo_a", true);
    let photo_b = required(photo_b, "photo_b", true);
    let landmarks_a = required(landmarks_a, "landmarks_a", true);
    let landmarks_b = required(landmarks_b, "landmarks_b", true);
    let output_dir = required(output_dir, "output_dir", false);

    if let Some(ModelSource::File(p)) = &model {
        if !p.exists() {
            errors.push(format!("model: {} does not exist", p.display()));
        }
    }
    if let Some(ModelSource::Synthetic {
        components,
        vertices,
        ..
    }) = &model
    {
        if *components == 0 {
            errors.push("synthetic model needs K >= 1".into());
        }
        if *vertices < crate::landmarks::IBUG_POINT_COUNT {
            errors.push(format!(
                "synthetic model needs V >= {}",
                crate::landmarks::IBUG_POINT_COUNT
            ));
        }
    }
    if !(t_step > 0.0) || !t_step.is_finite() {
        errors.push(format!("t_step must be > 0, got {t_step}"));
    }
    if !(0.0..=1.0).contains(&t_start) || !(0.0..=1.0).contains(&t_end) || t_start > t_end {
        errors.push(format!(
            "need 0 <= t_start <= t_end <= 1, got t_start = {t_start}, t_end = {t_end}"
        ));
    }
    if !(lambda >= 0.0) || !lambda.is_finite() {
        errors.push(format!("lambda must be >= 0, got {lambda}"));
    }
    if iterations == 0 {
        errors.push("iterations must be >= 1".into());
    }
    for (key, v) in [
        ("width", width),
        ("height", height),
        ("texture_size", texture_size),
    ] {
        if v == 0 {
            errors.push(format!("{key} must be >= 1"));
        }
    }
    for (key, v) in [("ka", render.ka), ("kd", render.kd), ("ks", render.ks)] {
        if !(v >= 0.0) || !v.is_finite() {
            errors.push(format!("{key} must be >= 0, got {v}"));
        }
    }
    if !(render.shininess >= 1.0) || !render.shininess.is_finite() {
        errors.push(format!("shininess must be >= 1, got {}", render.shininess));
    }

    if !errors.is_empty() {
        return Err(PipelineError::Config(errors));
    }
    Ok(PipelineConfig {
        photo_a,
        photo_b,
        landmarks_a,
        landmarks_b,
        model: model.expect("errors reported above"),
        t_start,
        t_end,
        t_step,
        morph_space,
        output_dir,
        lambda,
        iterations,
        render,
    })
}
