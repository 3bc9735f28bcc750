use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use facemorph::fitting::{extract_texture, synthesize_model, FitOptions, MorphableModel};
use facemorph::landmarks::{add_boundary_anchors, parse_pts, LandmarkSet};
use facemorph::pipeline::{frame_schedule, parse_config, ConfigOverrides, ModelSource};
use facemorph::render::{rasterize, RenderParams, View};
use facemorph::{
    build_correspondence, fit_from_photo_landmarks, interpolate_mesh, load_image, load_obj,
    run_animation, run_bench, save_image, save_obj, warp_blend, Image, MorphSpace,
};

#[derive(Parser)]
#[command(
    name = "facemorph",
    version,
    about = "Facial expression interpolation between two photos"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the morphable model to one photo's landmarks.
    Fit(FitArgs),
    /// Morph two photos through their shared landmark triangulation.
    Morph2d(Morph2dArgs),
    /// Linearly interpolate two meshes with the same topology.
    Interp(InterpArgs),
    /// Render a textured mesh.
    Render(RenderArgs),
    /// Run the full pipeline and write an animation frame sequence.
    Animate(AnimateArgs),
    /// Time mesh interpolation at several vertex counts.
    Bench(BenchArgs),
    /// Write a synthetic morphable model file.
    SynthModel(SynthArgs),
}

#[derive(Args)]
struct ModelArgs {
    /// Model file (MKMM1 binary).
    #[arg(long, conflicts_with = "synth")]
    model: Option<PathBuf>,
    /// Synthetic model as seed,K,V.
    #[arg(long)]
    synth: Option<String>,
}

impl ModelArgs {
    fn load(&self) -> Result<MorphableModel> {
        let source = match (&self.model, &self.synth) {
            (Some(p), _) => ModelSource::File(p.clone()),
            (None, Some(s)) => s.parse().map_err(anyhow::Error::msg)?,
            (None, None) => ModelSource::default(),
        };
        Ok(match source {
            ModelSource::File(p) => MorphableModel::load(&p)
                .with_context(|| format!("loading model {}", p.display()))?,
            ModelSource::Synthetic {
                seed,
                components,
                vertices,
            } => synthesize_model(seed, components, vertices)?,
        })
    }
}

#[derive(Args)]
struct FitArgs {
    #[arg(long = "photo-a")]
    photo: PathBuf,
    #[arg(long = "landmarks-a")]
    landmarks: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 0.1)]
    lambda: f64,
    #[arg(long, default_value_t = 3)]
    iterations: usize,
    /// Output OBJ mesh.
    #[arg(long)]
    out: PathBuf,
    /// Also write the photo resampled into the uv atlas.
    #[arg(long)]
    texture_out: Option<PathBuf>,
    #[arg(long, default_value_t = 512)]
    texture_size: u32,
}

#[derive(Args)]
struct Morph2dArgs {
    #[arg(long = "photo-a")]
    photo_a: PathBuf,
    #[arg(long = "photo-b")]
    photo_b: PathBuf,
    #[arg(long = "landmarks-a")]
    landmarks_a: PathBuf,
    #[arg(long = "landmarks-b")]
    landmarks_b: PathBuf,
    #[arg(long = "t-start", default_value_t = 0.0)]
    t_start: f64,
    #[arg(long = "t-end", default_value_t = 1.0)]
    t_end: f64,
    #[arg(long = "t-step", default_value_t = 0.1)]
    t_step: f64,
    /// Output directory for morph_NNN.png.
    #[arg(long)]
    out: PathBuf,
    /// Write the shared midpoint triangulation in .tris format.
    #[arg(long = "dump-triangulation")]
    dump_triangulation: Option<PathBuf>,
    /// Resize photo B (and its landmarks) to photo A's size.
    #[arg(long = "resize-b-to-a")]
    resize_b_to_a: bool,
}

#[derive(Args)]
struct InterpArgs {
    #[arg(long = "mesh-a")]
    mesh_a: PathBuf,
    #[arg(long = "mesh-b")]
    mesh_b: PathBuf,
    #[arg(long)]
    t: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ViewArg {
    Front,
    Side,
}

impl From<ViewArg> for View {
    fn from(v: ViewArg) -> Self {
        match v {
            ViewArg::Front => View::Front,
            ViewArg::Side => View::Side,
        }
    }
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long)]
    mesh: PathBuf,
    #[arg(long)]
    texture: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 512)]
    width: u32,
    #[arg(long, default_value_t = 512)]
    height: u32,
    #[arg(long, value_enum, default_value_t = ViewArg::Front)]
    view: ViewArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum SpaceArg {
    Photo,
    Texture,
}

#[derive(Args)]
struct AnimateArgs {
    /// TOML config; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "photo-a")]
    photo_a: Option<PathBuf>,
    #[arg(long = "photo-b")]
    photo_b: Option<PathBuf>,
    #[arg(long = "landmarks-a")]
    landmarks_a: Option<PathBuf>,
    #[arg(long = "landmarks-b")]
    landmarks_b: Option<PathBuf>,
    #[arg(long, conflicts_with = "synth")]
    model: Option<PathBuf>,
    /// Synthetic model as seed,K,V.
    #[arg(long)]
    synth: Option<String>,
    #[arg(long = "t-start")]
    t_start: Option<f64>,
    #[arg(long = "t-end")]
    t_end: Option<f64>,
    #[arg(long = "t-step")]
    t_step: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long = "morph-space", value_enum)]
    morph_space: Option<SpaceArg>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    width: Option<u32>,
    #[arg(long)]
    height: Option<u32>,
    #[arg(long)]
    texture_size: Option<u32>,
    #[arg(long, value_enum)]
    view: Option<ViewArg>,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated, strictly increasing vertex counts.
    #[arg(long = "bench-counts", value_delimiter = ',', default_values_t = [3448usize, 16759, 29587])]
    bench_counts: Vec<usize>,
    #[arg(long = "bench-iters", default_value_t = 100)]
    bench_iters: usize,
    /// Write the CSV report here as well as printing the table.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    /// seed,K,V
    #[arg(long, default_value = "1,10,3448")]
    synth: String,
    /// Model file; a JSON sidecar is written next to it.
    #[arg(long)]
    out: PathBuf,
}

fn read_landmarks(path: &Path, image: &Image) -> Result<LandmarkSet> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let lm = parse_pts(&text).with_context(|| format!("parsing {}", path.display()))?;
    lm.with_image_size(image.width(), image.height())
        .with_context(|| format!("{} against its photo", path.display()))
}

fn read_image(path: &Path) -> Result<Image> {
    load_image(path).with_context(|| format!("loading {}", path.display()))
}

fn read_mesh(path: &Path) -> Result<facemorph::TriangleMesh> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    load_obj(&text).with_context(|| format!("parsing {}", path.display()))
}

fn fit(args: FitArgs) -> Result<()> {
    let model = args.model.load()?;
    let photo = read_image(&args.photo)?;
    let lm = read_landmarks(&args.landmarks, &photo)?;
    let options = FitOptions {
        lambda: args.lambda,
        iterations: args.iterations,
        ..FitOptions::default()
    };
    let result = fit_from_photo_landmarks(&model, &lm, &options)?;
    for (i, rmse) in result.rmse_history.iter().enumerate() {
        println!("iteration {}: reprojection RMSE {rmse:.4} px", i + 1);
    }
    let coefficients: Vec<String> = result
        .coefficients
        .0
        .iter()
        .map(|a| format!("{a:.4}"))
        .collect();
    println!("coefficients: [{}]", coefficients.join(", "));
    fs::write(&args.out, save_obj(&result.mesh))
        .with_context(|| format!("writing {}", args.out.display()))?;
    if let Some(path) = args.texture_out {
        let tex = extract_texture(&result.mesh, &result.camera, &photo, args.texture_size)?;
        save_image(&tex, &path)?;
    }
    Ok(())
}

fn morph2d(args: Morph2dArgs) -> Result<()> {
    let photo_a = read_image(&args.photo_a)?;
    let mut photo_b = read_image(&args.photo_b)?;
    let lm_a = read_landmarks(&args.landmarks_a, &photo_a)?;
    let mut lm_b = read_landmarks(&args.landmarks_b, &photo_b)?;
    if args.resize_b_to_a && photo_b.dimensions() != photo_a.dimensions() {
        let (w, h) = photo_a.dimensions();
        photo_b = photo_b.resized(w, h)?;
        lm_b = lm_b.rescaled(w, h)?;
    }
    let prepare = |lm: &LandmarkSet| lm.nudged_inward().and_then(|n| add_boundary_anchors(&n));
    let mapping = build_correspondence(&prepare(&lm_a)?, &prepare(&lm_b)?)?;
    if let Some(path) = &args.dump_triangulation {
        fs::write(path, mapping.midpoint_triangulation().to_tris_string())
            .with_context(|| format!("writing {}", path.display()))?;
    }
    let valid = args.t_step > 0.0
        && (0.0..=1.0).contains(&args.t_start)
        && (args.t_start..=1.0).contains(&args.t_end);
    if !valid {
        bail!("need 0 <= t-start <= t-end <= 1 and t-step > 0");
    }
    fs::create_dir_all(&args.out)?;
    for (k, t) in frame_schedule(args.t_start, args.t_end, args.t_step)
        .into_iter()
        .enumerate()
    {
        let img = warp_blend(&photo_a, &photo_b, &mapping, t)?;
        let path = args.out.join(format!("morph_{k:03}.png"));
        save_image(&img, &path)?;
        info!("t = {t}: {}", path.display());
    }
    Ok(())
}

fn interp(args: InterpArgs) -> Result<()> {
    let a = read_mesh(&args.mesh_a)?;
    let b = read_mesh(&args.mesh_b)?;
    let mesh = interpolate_mesh(&a, &b, args.t)?;
    fs::write(&args.out, save_obj(&mesh))
        .with_context(|| format!("writing {}", args.out.display()))?;
    Ok(())
}

fn render(args: RenderArgs) -> Result<()> {
    let mesh = read_mesh(&args.mesh)?;
    let texture = read_image(&args.texture)?;
    let mut params = RenderParams::new(args.width, args.height);
    params.view = args.view.into();
    let frame = rasterize(&mesh, &texture, &params)?;
    save_image(&frame, &args.out)?;
    Ok(())
}

fn animate(args: AnimateArgs) -> Result<()> {
    let overrides = ConfigOverrides {
        photo_a: args.photo_a,
        photo_b: args.photo_b,
        landmarks_a: args.landmarks_a,
        landmarks_b: args.landmarks_b,
        model: args.model,
        synth: args.synth,
        t_start: args.t_start,
        t_end: args.t_end,
        t_step: args.t_step,
        morph_space: args.morph_space.map(|s| match s {
            SpaceArg::Photo => MorphSpace::Photo,
            SpaceArg::Texture => MorphSpace::Texture,
        }),
        output_dir: args.out,
        lambda: args.lambda,
        iterations: args.iterations,
        width: args.width,
        height: args.height,
        texture_size: args.texture_size,
        view: args.view.map(Into::into),
    };
    let config = parse_config(args.config.as_deref(), &overrides)?;
    let frames = run_animation(&config)?;
    println!(
        "wrote {} frames and manifest.json to {}",
        frames.len(),
        config.output_dir.display()
    );
    Ok(())
}

fn bench(args: BenchArgs) -> Result<()> {
    let report = run_bench(&args.bench_counts, args.bench_iters)?;
    print!("{}", report.to_table());
    if let Some(path) = args.out {
        fs::write(&path, report.to_csv()).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn synth_model(args: SynthArgs) -> Result<()> {
    let ModelSource::Synthetic {
        seed,
        components,
        vertices,
    } = args.synth.parse().map_err(anyhow::Error::msg)?
    else {
        unreachable!("FromStr only yields synthetic models");
    };
    let model = synthesize_model(seed, components, vertices)?;
    model
        .save(&args.out)
        .with_context(|| format!("writing {}", args.out.display()))?;
    println!(
        "wrote {} (K = {components}, V = {vertices}, seed = {seed})",
        args.out.display()
    );
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Fit(a) => fit(a),
        Command::Morph2d(a) => morph2d(a),
        Command::Interp(a) => interp(a),
        Command::Render(a) => render(a),
        Command::Animate(a) => animate(a),
        Command::Bench(a) => bench(a),
        Command::SynthModel(a) => synth_model(a),
    }
}
