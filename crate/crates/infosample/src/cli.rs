//! `infosample` command line.
//!
//! Exit status: 0 on success, 1 for usage errors (bad flags, malformed job
//! config), 2 for data errors (invalid images, geometry, corrupt files), 3 for
//! I/O failures.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::builder::{PossibleValuesParser, TypedValueParser};
use clap::{Args, Parser, Subcommand};
use infosample_core::importance::{score_map, score_map_naive_with};
use infosample_core::resample::{bicubic_downscale, crop_to_multiple};
use infosample_core::sampling::{sample, Budget};
use infosample_core::{MetricKind, PatchGeometry, Raster, SamplingConfig, ScaleFactor, Strategy};

use crate::artifacts::{emit_heatmap, export_crops};
use crate::bench::run_bench;
use crate::iimp::{load_map, save_map};
use crate::io::{load_image, save_image};
use crate::manifest::{load_manifest, save_manifest};
use crate::pipeline::{list_images, run_dataset, JobConfig};
use crate::{Error, ExitKind, Result};

#[derive(Debug, Parser)]
#[command(
    name = "infosample",
    version,
    about = "Score, sample and export informative super-resolution training patches"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Crop to a multiple of the scale and bicubic-downscale one image or a directory
    Degrade(DegradeArgs),
    /// Compute the importance map of an image and write it as IIMP
    Score(ScoreArgs),
    /// Select patches from an IIMP map and write a manifest
    Sample(SampleArgs),
    /// Export the HR and LR crops listed in a manifest
    Crop(CropArgs),
    /// Render an IIMP map as a grayscale PNG
    Heatmap(HeatmapArgs),
    /// Time the naive and integral-image scorers after checking they agree
    Bench(BenchArgs),
    /// Run the whole pipeline over a directory from a JSON job config
    Run(RunArgs),
}

fn parse_scale(s: &str) -> std::result::Result<ScaleFactor, String> {
    let n: usize = s.parse().map_err(|_| format!("unsupported scale factor {s:?} (supported: 2, 3, 4)"))?;
    ScaleFactor::new(n).map_err(|e| e.to_string())
}

fn metric_parser() -> impl TypedValueParser<Value = MetricKind> {
    PossibleValuesParser::new(MetricKind::ALL.map(MetricKind::name))
        .map(|s| MetricKind::from_name(&s).expect("possible values are metric names"))
}

fn strategy_parser() -> impl TypedValueParser<Value = Strategy> {
    PossibleValuesParser::new(Strategy::ALL.map(Strategy::name))
        .map(|s| Strategy::from_name(&s).expect("possible values are strategy names"))
}

#[derive(Debug, Args)]
pub struct DegradeArgs {
    /// Input PNG, or a directory of PNGs
    #[arg(long)]
    pub input: PathBuf,
    /// Output PNG, or a directory when the input is one
    #[arg(long)]
    pub output: PathBuf,
    /// Downscaling factor: 2, 3 or 4
    #[arg(long, value_parser = parse_scale)]
    pub scale: ScaleFactor,
}

#[derive(Debug, Args)]
pub struct Geometry {
    /// Scale factor between HR and LR: 2, 3 or 4
    #[arg(long, value_parser = parse_scale)]
    pub scale: ScaleFactor,
    /// HR patch side k; must be divisible by the scale
    #[arg(long)]
    pub patch_size: usize,
    /// Anchor spacing in HR pixels [default: the scale factor]
    #[arg(long)]
    pub stride: Option<usize>,
}

impl Geometry {
    fn build(&self) -> Result<PatchGeometry> {
        let stride = self.stride.unwrap_or(self.scale.get());
        Ok(PatchGeometry::new(self.patch_size, stride, self.scale)?)
    }
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// HR image
    #[arg(long)]
    pub hr: PathBuf,
    /// LR image; synthesized by bicubic downscaling when omitted
    #[arg(long)]
    pub lr: Option<PathBuf>,
    #[command(flatten)]
    pub geometry: Geometry,
    /// Importance metric
    #[arg(long, default_value = "psnr-bilinear", value_parser = metric_parser())]
    pub metric: MetricKind,
    /// Output IIMP file
    #[arg(long)]
    pub out_map: PathBuf,
    /// Use the sliding-window reference scorer instead of integral images
    #[arg(long)]
    pub naive: bool,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    /// Input IIMP map
    #[arg(long)]
    pub map: PathBuf,
    /// Selection strategy
    #[arg(long, value_parser = strategy_parser())]
    pub strategy: Strategy,
    /// Fraction of anchors to select, in (0, 1]
    #[arg(long)]
    pub portion: Option<f64>,
    /// Number of patches to select
    #[arg(long)]
    pub count: Option<usize>,
    /// Largest IoU allowed between NMS selections, in [0, 1)
    #[arg(long, default_value_t = 0.0)]
    pub iou_threshold: f64,
    /// Random seed; required for dart
    #[arg(long)]
    pub seed: Option<u64>,
    /// Consecutive rejected darts before stopping [default: 10 x the count]
    #[arg(long)]
    pub max_attempts: Option<usize>,
    /// Output manifest JSON
    #[arg(long)]
    pub out_manifest: PathBuf,
    /// Image identifier recorded in the manifest [default: the map's file stem]
    #[arg(long)]
    pub image: Option<String>,
    /// HR path recorded in the manifest
    #[arg(long, default_value = "")]
    pub hr_path: String,
    /// LR path recorded in the manifest
    #[arg(long, default_value = "")]
    pub lr_path: String,
}

#[derive(Debug, Args)]
pub struct CropArgs {
    /// Manifest JSON
    #[arg(long)]
    pub manifest: PathBuf,
    /// HR image the manifest was sampled from
    #[arg(long)]
    pub hr: PathBuf,
    /// LR image; synthesized by bicubic downscaling when omitted
    #[arg(long)]
    pub lr: Option<PathBuf>,
    /// Directory for the crop PNGs
    #[arg(long)]
    pub out_dir: PathBuf,
    /// File name prefix [default: the manifest's image identifier]
    #[arg(long)]
    pub stem: Option<String>,
}

#[derive(Debug, Args)]
pub struct HeatmapArgs {
    /// Input IIMP map
    #[arg(long)]
    pub map: PathBuf,
    /// Output PNG
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// HR image
    #[arg(long)]
    pub hr: PathBuf,
    /// LR image; synthesized by bicubic downscaling when omitted
    #[arg(long)]
    pub lr: Option<PathBuf>,
    #[command(flatten)]
    pub geometry: Geometry,
    /// Timed runs per scorer; the best is reported
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(1..))]
    pub repeats: u32,
    /// Print the report as JSON
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Job config JSON; relative paths inside resolve against its directory
    #[arg(long)]
    pub config: PathBuf,
}

/// Parses `args` (program name first), runs the command and returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitKind::Usage as i32 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.kind() as i32
        }
    }
}

pub fn execute(command: Command) -> Result<()> {
    match command {
        Command::Degrade(a) => degrade(&a),
        Command::Score(a) => score(&a),
        Command::Sample(a) => sample_cmd(&a),
        Command::Crop(a) => crop(&a),
        Command::Heatmap(a) => emit_heatmap(&load_map(&a.map)?, &a.output),
        Command::Bench(a) => bench(&a),
        Command::Run(a) => run_job(&a),
    }
}

fn degrade_one(input: &Path, output: &Path, s: ScaleFactor) -> Result<()> {
    let hr = crop_to_multiple(&load_image(input)?, s)?;
    save_image(&bicubic_downscale(&hr, s)?, output)
}

fn degrade(a: &DegradeArgs) -> Result<()> {
    if !a.input.is_dir() {
        return degrade_one(&a.input, &a.output, a.scale);
    }
    std::fs::create_dir_all(&a.output).map_err(Error::io(&a.output))?;
    let files = list_images(&a.input)?;
    if files.is_empty() {
        return Err(Error::EmptyInput(a.input.clone()));
    }
    for file in files {
        degrade_one(&file, &a.output.join(file.file_name().expect("listed files have names")), a.scale)?;
    }
    Ok(())
}

/// HR cropped to a multiple of the scale and its LR counterpart.
fn hr_lr_pair(hr: &Path, lr: Option<&Path>, s: ScaleFactor) -> Result<(Raster, Raster)> {
    let hr = load_image(hr)?;
    match lr {
        Some(path) => Ok((hr, load_image(path)?)),
        None => {
            let hr = crop_to_multiple(&hr, s)?;
            let lr = bicubic_downscale(&hr, s)?;
            Ok((hr, lr))
        }
    }
}

fn score(a: &ScoreArgs) -> Result<()> {
    let geom = a.geometry.build()?;
    let (hr, lr) = hr_lr_pair(&a.hr, a.lr.as_deref(), geom.scale())?;
    let map = if a.naive {
        if !a.metric.needs_lr() {
            return Err(Error::Usage(format!("--naive applies to PSNR metrics, not {}", a.metric)));
        }
        score_map_naive_with(&hr, &lr, &geom, a.metric)?
    } else {
        score_map(&hr, Some(&lr), &geom, a.metric)?
    };
    save_map(&map, &a.out_map)?;
    println!("{}x{} anchors ({}) -> {}", map.rows(), map.cols(), map.metric(), a.out_map.display());
    Ok(())
}

fn sample_cmd(a: &SampleArgs) -> Result<()> {
    let budget = match (a.portion, a.count) {
        (Some(p), None) => Budget::Portion(p),
        (None, Some(n)) => Budget::Count(n),
        _ => return Err(Error::format("arguments", "exactly one of --portion and --count is required")),
    };
    if a.strategy == Strategy::Dart && a.seed.is_none() {
        return Err(Error::Usage("--seed is required for the dart strategy".into()));
    }
    let map = load_map(&a.map)?;
    let mut cfg =
        SamplingConfig::new(a.strategy, budget).with_seed(a.seed.unwrap_or(0)).with_iou_threshold(a.iou_threshold);
    cfg.dart_max_attempts = a.max_attempts;
    let stem = a.map.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let image = a.image.as_deref().unwrap_or(&stem);
    let manifest = sample(&map, &cfg)?.with_source(image, &a.hr_path, &a.lr_path);
    save_manifest(&manifest, &a.out_manifest)?;
    println!("{} of {} requested -> {}", manifest.entries.len(), manifest.requested, a.out_manifest.display());
    Ok(())
}

fn crop(a: &CropArgs) -> Result<()> {
    let manifest = load_manifest(&a.manifest)?;
    let s = ScaleFactor::new(manifest.scale)?;
    let (hr, lr) = hr_lr_pair(&a.hr, a.lr.as_deref(), s)?;
    let stem = match (&a.stem, manifest.image.as_str()) {
        (Some(stem), _) => stem.clone(),
        (None, "") => "patch".into(),
        (None, image) => image.into(),
    };
    std::fs::create_dir_all(&a.out_dir).map_err(Error::io(&a.out_dir))?;
    let written = export_crops(&manifest, &hr, &lr, &a.out_dir, &stem)?;
    println!("{} files -> {}", written.len(), a.out_dir.display());
    Ok(())
}

fn bench(a: &BenchArgs) -> Result<()> {
    let geom = a.geometry.build()?;
    let (hr, lr) = hr_lr_pair(&a.hr, a.lr.as_deref(), geom.scale())?;
    let report = run_bench(&hr, &lr, &geom, a.repeats as usize)?;
    let mut out = std::io::stdout().lock();
    let text =
        if a.json { serde_json::to_string_pretty(&report).expect("report serializes") } else { report.to_string() };
    writeln!(out, "{text}").map_err(Error::io(Path::new("<stdout>")))
}

fn run_job(a: &RunArgs) -> Result<()> {
    let base = a.config.parent().unwrap_or(Path::new("."));
    let job = JobConfig::load(&a.config)?.into_job(base)?;
    let report = run_dataset(&job)?;
    println!(
        "{} images, {} anchors, {} patches in {:.0} ms -> {}",
        report.images,
        report.anchors,
        report.selected,
        report.wall_ms,
        job.output.display()
    );
    for f in &report.failures {
        eprintln!("failed: {}: {}", f.image, f.error);
    }
    if report.failures.is_empty() {
        Ok(())
    } else {
        Err(Error::format(
            "run",
            format!("{} of {} images failed", report.failures.len(), report.failures.len() + report.images),
        ))
    }
}
