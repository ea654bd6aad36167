//! Dataset-level processing: every PNG in a directory is degraded, scored and
//! sampled, and the requested artifacts are written under one output tree:
//!
//! ```text
//! out/
//!   lr/{stem}.png          synthesized LR (absent when LR images are provided)
//!   maps/{stem}.iimp
//!   manifests/{stem}.json
//!   heatmaps/{stem}.png
//!   crops/{stem}_{index:06}_{hr|lr}.png
//!   report.json
//! ```
//!
//! Images are independent; a failure is recorded in the report and the rest of
//! the run continues. Output files depend only on the inputs and the job, never
//! on worker count or completion order. The report's timings are the only
//! non-deterministic output.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use infosample_core::importance::score_map;
use infosample_core::resample::{bicubic_downscale, crop_to_multiple};
use infosample_core::sampling::{sample, Budget};
use infosample_core::{Error as CoreError, MetricKind, PatchGeometry, SamplingConfig, ScaleFactor, Strategy};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::artifacts::{emit_heatmap, export_crops};
use crate::iimp::save_map;
use crate::io::{load_image, save_image};
use crate::manifest::save_manifest;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Emit {
    pub maps: bool,
    pub manifests: bool,
    pub heatmaps: bool,
    pub crops: bool,
}

impl Default for Emit {
    fn default() -> Self {
        Self { maps: true, manifests: true, heatmaps: true, crops: true }
    }
}

#[derive(Clone, Debug)]
pub struct DatasetJob {
    pub input: PathBuf,
    pub output: PathBuf,
    /// Directory of pre-rendered LR images with the same file names as the
    /// inputs; LR is synthesized with the bicubic kernel when absent.
    pub lr_input: Option<PathBuf>,
    pub geometry: PatchGeometry,
    pub metric: MetricKind,
    pub sampling: SamplingConfig,
    pub emit: Emit,
    pub workers: usize,
}

/// Where the LR images of a run came from. Absolute PSNR values depend on the
/// bicubic implementation, so the report records it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LrSource {
    SynthesizedBicubic,
    Provided,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct StageTimes {
    pub load_ms: f64,
    pub degrade_ms: f64,
    pub score_ms: f64,
    pub sample_ms: f64,
    pub write_ms: f64,
}

impl StageTimes {
    fn add(&mut self, other: &StageTimes) {
        self.load_ms += other.load_ms;
        self.degrade_ms += other.degrade_ms;
        self.score_ms += other.score_ms;
        self.sample_ms += other.sample_ms;
        self.write_ms += other.write_ms;
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ImageSummary {
    pub image: String,
    pub width: usize,
    pub height: usize,
    pub anchors: usize,
    pub requested: usize,
    pub selected: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Failure {
    pub image: String,
    pub error: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub images: usize,
    pub anchors: usize,
    pub selected: usize,
    pub lr_source: LrSource,
    pub workers: usize,
    pub wall_ms: f64,
    /// Per-stage time summed over images (worker time, not wall time).
    pub stages: StageTimes,
    pub per_image: Vec<ImageSummary>,
    pub failures: Vec<Failure>,
}

struct Layout {
    lr: PathBuf,
    maps: PathBuf,
    manifests: PathBuf,
    heatmaps: PathBuf,
    crops: PathBuf,
}

impl Layout {
    fn new(out: &Path) -> Self {
        Self {
            lr: out.join("lr"),
            maps: out.join("maps"),
            manifests: out.join("manifests"),
            heatmaps: out.join("heatmaps"),
            crops: out.join("crops"),
        }
    }

    fn create(&self, job: &DatasetJob) -> Result<()> {
        let wanted = [
            (&self.lr, job.lr_input.is_none()),
            (&self.maps, job.emit.maps),
            (&self.manifests, job.emit.manifests),
            (&self.heatmaps, job.emit.heatmaps),
            (&self.crops, job.emit.crops),
        ];
        for (dir, on) in wanted {
            if on {
                std::fs::create_dir_all(dir).map_err(Error::io(dir))?;
            }
        }
        Ok(())
    }
}

/// PNG files directly inside `dir`, sorted by file name.
pub fn list_images(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(Error::io(dir))? {
        let path = entry.map_err(Error::io(dir))?.path();
        let is_png = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("png"));
        if is_png && path.is_file() {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

fn stem_of(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

pub fn run_dataset(job: &DatasetJob) -> Result<RunReport> {
    let start = Instant::now();
    let files = list_images(&job.input)?;
    if files.is_empty() {
        return Err(Error::EmptyInput(job.input.clone()));
    }
    let layout = Layout::new(&job.output);
    layout.create(job)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(job.workers.max(1))
        .build()
        .map_err(|e| Error::Usage(format!("cannot start worker pool: {e}")))?;
    let outcomes: Vec<_> = pool.install(|| files.par_iter().map(|path| process_image(job, &layout, path)).collect());

    let mut stages = StageTimes::default();
    let mut per_image = Vec::new();
    let mut failures = Vec::new();
    for (path, outcome) in files.iter().zip(outcomes) {
        match outcome {
            Ok((summary, times)) => {
                stages.add(&times);
                per_image.push(summary);
            }
            Err(e) => failures.push(Failure { image: stem_of(path), error: e.to_string() }),
        }
    }
    let report = RunReport {
        images: per_image.len(),
        anchors: per_image.iter().map(|s| s.anchors).sum(),
        selected: per_image.iter().map(|s| s.selected).sum(),
        lr_source: if job.lr_input.is_some() { LrSource::Provided } else { LrSource::SynthesizedBicubic },
        workers: job.workers.max(1),
        wall_ms: ms(start.elapsed()),
        stages,
        per_image,
        failures,
    };
    let path = job.output.join("report.json");
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    std::fs::write(&path, text).map_err(Error::io(&path))?;
    Ok(report)
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

fn timed<T>(slot: &mut f64, f: impl FnOnce() -> T) -> T {
    let start = Instant::now();
    let out = f();
    *slot += ms(start.elapsed());
    out
}

fn process_image(job: &DatasetJob, layout: &Layout, path: &Path) -> Result<(ImageSummary, StageTimes)> {
    let stem = stem_of(path);
    let mut t = StageTimes::default();
    let scale = job.geometry.scale();

    let original = timed(&mut t.load_ms, || load_image(path))?;
    let (hr, lr, lr_path) = match &job.lr_input {
        Some(dir) => {
            let lr_path = dir.join(path.file_name().expect("listed files have names"));
            let lr = timed(&mut t.load_ms, || load_image(&lr_path))?;
            let hr =
                timed(&mut t.degrade_ms, || original.crop(0, 0, lr.width() * scale.get(), lr.height() * scale.get()))
                    .map_err(|_| CoreError::DimensionMismatch {
                    hr: (original.width(), original.height()),
                    lr: (lr.width(), lr.height()),
                    scale: scale.get(),
                })?;
            (hr, lr, lr_path)
        }
        None => {
            let (hr, lr) = timed(&mut t.degrade_ms, || -> Result<_> {
                let hr = crop_to_multiple(&original, scale)?;
                let lr = bicubic_downscale(&hr, scale)?;
                Ok((hr, lr))
            })?;
            let lr_path = layout.lr.join(format!("{stem}.png"));
            timed(&mut t.write_ms, || save_image(&lr, &lr_path))?;
            (hr, lr, lr_path)
        }
    };

    let map = timed(&mut t.score_ms, || score_map(&hr, Some(&lr), &job.geometry, job.metric))?;
    let manifest = timed(&mut t.sample_ms, || sample(&map, &job.sampling))?.with_source(
        &stem,
        &path.to_string_lossy(),
        &lr_path.to_string_lossy(),
    );

    timed(&mut t.write_ms, || -> Result<()> {
        if job.emit.maps {
            save_map(&map, &layout.maps.join(format!("{stem}.iimp")))?;
        }
        if job.emit.manifests {
            save_manifest(&manifest, &layout.manifests.join(format!("{stem}.json")))?;
        }
        if job.emit.heatmaps {
            emit_heatmap(&map, &layout.heatmaps.join(format!("{stem}.png")))?;
        }
        if job.emit.crops {
            export_crops(&manifest, &hr, &lr, &layout.crops, &stem)?;
        }
        Ok(())
    })?;

    let summary = ImageSummary {
        image: stem,
        width: hr.width(),
        height: hr.height(),
        anchors: map.len(),
        requested: manifest.requested,
        selected: manifest.entries.len(),
    };
    Ok((summary, t))
}

/// JSON job description read by `infosample run`.
///
/// Relative paths are resolved against the config file's directory.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub input: PathBuf,
    pub output: PathBuf,
    #[serde(default)]
    pub lr_input: Option<PathBuf>,
    pub scale: usize,
    pub patch_size: usize,
    /// Defaults to the scale factor.
    #[serde(default)]
    pub stride: Option<usize>,
    #[serde(default = "default_metric")]
    pub metric: String,
    pub strategy: String,
    #[serde(default)]
    pub portion: Option<f64>,
    #[serde(default)]
    pub count: Option<usize>,
    #[serde(default)]
    pub nms_iou_threshold: f64,
    #[serde(default)]
    pub dart_max_attempts: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub emit: Emit,
    /// Defaults to the number of available CPUs.
    #[serde(default)]
    pub workers: Option<usize>,
}

fn default_metric() -> String {
    MetricKind::PsnrBilinear.name().into()
}

impl JobConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            if path == "." {
                Error::Usage(format!("config: {}", e.inner()))
            } else {
                Error::Usage(format!("config field `{path}`: {}", e.inner()))
            }
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(Error::io(path))?;
        Self::parse(&text)
    }

    /// Validates the config and builds the job; `base` resolves relative paths.
    pub fn into_job(self, base: &Path) -> Result<DatasetJob> {
        let field = |name: &str, e: &dyn std::fmt::Display| Error::Usage(format!("config field `{name}`: {e}"));
        let scale = ScaleFactor::new(self.scale).map_err(|e| field("scale", &e))?;
        let stride = self.stride.unwrap_or(self.scale);
        let geometry = PatchGeometry::new(self.patch_size, stride, scale).map_err(|e| field("patch_size", &e))?;
        let metric = MetricKind::from_name(&self.metric)
            .ok_or_else(|| field("metric", &format!("unknown metric {:?}", self.metric)))?;
        let strategy = Strategy::from_name(&self.strategy)
            .ok_or_else(|| field("strategy", &format!("unknown strategy {:?} (greedy, nms, dart)", self.strategy)))?;
        let budget = match (self.portion, self.count) {
            (Some(p), None) => Budget::Portion(p),
            (None, Some(n)) => Budget::Count(n),
            _ => return Err(Error::Usage("config: exactly one of `portion` and `count` is required".into())),
        };
        if strategy == Strategy::Dart && self.seed.is_none() {
            return Err(Error::Usage("config field `seed`: required for the dart strategy".into()));
        }
        let mut sampling = SamplingConfig::new(strategy, budget)
            .with_seed(self.seed.unwrap_or(0))
            .with_iou_threshold(self.nms_iou_threshold);
        sampling.dart_max_attempts = self.dart_max_attempts;
        let workers = match self.workers {
            Some(0) => return Err(field("workers", &"must be at least 1")),
            Some(n) => n,
            None => std::thread::available_parallelism().map_or(1, |n| n.get()),
        };
        Ok(DatasetJob {
            input: base.join(self.input),
            output: base.join(self.output),
            lr_input: self.lr_input.map(|p| base.join(p)),
            geometry,
            metric,
            sampling,
            emit: self.emit,
            workers,
        })
    }
}
