//! Crop and heatmap files.

use std::path::{Path, PathBuf};

use infosample_core::heatmap::heatmap;
use infosample_core::{Error as CoreError, ImportanceMap, Manifest, Raster};

use crate::io::save_image;
use crate::Result;

/// File name of the HR or LR crop for entry `index`.
pub fn crop_name(stem: &str, index: usize, hr: bool) -> String {
    format!("{stem}_{index:06}_{}.png", if hr { "hr" } else { "lr" })
}

/// Writes the `k x k` HR crop and the `k/s x k/s` LR crop of every entry.
///
/// Returns the written paths, HR before LR for each entry.
pub fn export_crops(manifest: &Manifest, hr: &Raster, lr: &Raster, out_dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
    let (s, k) = (manifest.scale, manifest.patch_size);
    if s == 0 || k % s != 0 {
        return Err(CoreError::InvalidGeometry("patch size must be divisible by the scale factor").into());
    }
    if lr.width() * s != hr.width() || lr.height() * s != hr.height() || lr.channels() != hr.channels() {
        return Err(CoreError::DimensionMismatch {
            hr: (hr.width(), hr.height()),
            lr: (lr.width(), lr.height()),
            scale: s,
        }
        .into());
    }
    // validate everything before writing anything
    let crops = manifest
        .entries
        .iter()
        .map(|e| Ok((hr.crop(e.u, e.v, k, k)?, lr.crop(e.lr_u, e.lr_v, k / s, k / s)?)))
        .collect::<std::result::Result<Vec<_>, CoreError>>()?;
    let mut written = Vec::with_capacity(2 * crops.len());
    for (i, (hr_crop, lr_crop)) in crops.iter().enumerate() {
        for (img, is_hr) in [(hr_crop, true), (lr_crop, false)] {
            let path = out_dir.join(crop_name(stem, i, is_hr));
            save_image(img, &path)?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Single-channel PNG at anchor-grid resolution, brightest where most informative.
pub fn emit_heatmap(map: &ImportanceMap, path: &Path) -> Result<()> {
    save_image(&heatmap(map)?, path)
}
