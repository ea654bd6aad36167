//! Manifest JSON.
//!
//! ```json
//! {
//!   "image": "0001",
//!   "hr_path": "data/hr/0001.png",
//!   "lr_path": "out/lr/0001.png",
//!   "scale": 2,
//!   "patch_size": 192,
//!   "stride": 2,
//!   "metric": "psnr-bilinear",
//!   "strategy": "greedy",
//!   "portion": 0.1,
//!   "requested": 53372,
//!   "seed": 0,
//!   "nms_iou_threshold": 0.0,
//!   "dart_max_attempts": 533720,
//!   "entries": [{ "u": 512, "v": 96, "lr_u": 256, "lr_v": 48, "score": 18.73021 }]
//! }
//! ```
//!
//! Exactly one of `portion` and `count` is present. Scores are written as the
//! shortest decimal that reads back to the same `f32`; the zero-error sentinel
//! is the string `"inf"`. Entries are most informative first.

use std::path::Path;

use infosample_core::sampling::{Budget, ManifestEntry};
use infosample_core::{Manifest, MetricKind, Strategy};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::value::RawValue;

use crate::{Error, Result};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestJson {
    image: String,
    hr_path: String,
    lr_path: String,
    scale: usize,
    patch_size: usize,
    stride: usize,
    metric: String,
    strategy: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    portion: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    count: Option<usize>,
    requested: usize,
    seed: u64,
    nms_iou_threshold: f64,
    dart_max_attempts: usize,
    entries: Vec<EntryJson>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntryJson {
    u: usize,
    v: usize,
    lr_u: usize,
    lr_v: usize,
    #[serde(serialize_with = "write_score", deserialize_with = "read_score")]
    score: f32,
}

fn write_score<S: Serializer>(score: &f32, s: S) -> std::result::Result<S::Ok, S::Error> {
    if score.is_infinite() {
        s.serialize_str("inf")
    } else {
        s.serialize_f32(*score)
    }
}

/// Parses the number text straight to `f32`; going through `f64` first can
/// double-round a shortest representation onto the wrong neighbour.
fn read_score<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f32, D::Error> {
    let raw = Box::<RawValue>::deserialize(d)?;
    let text = raw.get();
    if text == "\"inf\"" {
        return Ok(f32::INFINITY);
    }
    match text.parse::<f32>() {
        Ok(v) if v.is_finite() && !text.starts_with('"') => Ok(v),
        _ => Err(serde::de::Error::custom(format!("invalid score {text}"))),
    }
}

impl From<&Manifest> for ManifestJson {
    fn from(m: &Manifest) -> Self {
        let (portion, count) = match m.budget {
            Budget::Portion(p) => (Some(p), None),
            Budget::Count(n) => (None, Some(n)),
        };
        ManifestJson {
            image: m.image.clone(),
            hr_path: m.hr_path.clone(),
            lr_path: m.lr_path.clone(),
            scale: m.scale,
            patch_size: m.patch_size,
            stride: m.stride,
            metric: m.metric.name().into(),
            strategy: m.strategy.name().into(),
            portion,
            count,
            requested: m.requested,
            seed: m.seed,
            nms_iou_threshold: m.nms_iou_threshold,
            dart_max_attempts: m.dart_max_attempts,
            entries: m
                .entries
                .iter()
                .map(|e| EntryJson { u: e.u, v: e.v, lr_u: e.lr_u, lr_v: e.lr_v, score: e.score })
                .collect(),
        }
    }
}

impl TryFrom<ManifestJson> for Manifest {
    type Error = String;

    fn try_from(j: ManifestJson) -> std::result::Result<Self, String> {
        let metric = MetricKind::from_name(&j.metric).ok_or_else(|| format!("unknown metric {:?}", j.metric))?;
        let strategy = Strategy::from_name(&j.strategy).ok_or_else(|| format!("unknown strategy {:?}", j.strategy))?;
        let budget = match (j.portion, j.count) {
            (Some(p), None) => Budget::Portion(p),
            (None, Some(n)) => Budget::Count(n),
            _ => return Err("exactly one of portion and count must be present".into()),
        };
        if j.scale == 0 {
            return Err("scale must be positive".into());
        }
        let entries = j
            .entries
            .into_iter()
            .map(|e| {
                if e.lr_u * j.scale != e.u || e.lr_v * j.scale != e.v {
                    return Err(format!("entry ({}, {}) has inconsistent LR anchor", e.u, e.v));
                }
                Ok(ManifestEntry { u: e.u, v: e.v, lr_u: e.lr_u, lr_v: e.lr_v, score: e.score })
            })
            .collect::<std::result::Result<_, String>>()?;
        Ok(Manifest {
            image: j.image,
            hr_path: j.hr_path,
            lr_path: j.lr_path,
            scale: j.scale,
            patch_size: j.patch_size,
            stride: j.stride,
            metric,
            strategy,
            budget,
            requested: j.requested,
            seed: j.seed,
            nms_iou_threshold: j.nms_iou_threshold,
            dart_max_attempts: j.dart_max_attempts,
            entries,
        })
    }
}

/// Pretty-printed JSON with a trailing newline.
pub fn manifest_to_json(m: &Manifest) -> String {
    let mut s = serde_json::to_string_pretty(&ManifestJson::from(m)).expect("manifest serializes");
    s.push('\n');
    s
}

pub fn manifest_from_json(text: &str) -> Result<Manifest> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: ManifestJson = serde_path_to_error::deserialize(de).map_err(|e| Error::format("manifest", e))?;
    Manifest::try_from(raw).map_err(|e| Error::format("manifest", e))
}

pub fn save_manifest(m: &Manifest, path: &Path) -> Result<()> {
    std::fs::write(path, manifest_to_json(m)).map_err(Error::io(path))
}

pub fn load_manifest(path: &Path) -> Result<Manifest> {
    let text = std::fs::read_to_string(path).map_err(Error::io(path))?;
    manifest_from_json(&text).map_err(|e| match e {
        Error::Format { message, .. } => Error::format(path.display().to_string(), message),
        other => other,
    })
}
