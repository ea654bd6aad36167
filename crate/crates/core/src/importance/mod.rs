//! Per-anchor informative-importance score maps.
//!
//! For every `k x k` HR patch anchored on a stride grid, the default metric is
//! the PSNR between the bilinearly upscaled LR image and the HR image over
//! that window. Lower PSNR = harder to restore linearly = more informative.
//!
//! Two implementations produce the PSNR map:
//!
//! - [`score_map_fast`] expands the windowed squared error into
//!   `sum(HR*HR) + sum(SR*SR) - 2 sum(HR*SR)` and reads each term from an
//!   exact integral image, O(1) per anchor.
//! - [`score_map_naive`] visits every pixel of every window.
//!
//! Both quantise the SR reference to the same fixed-point grid
//! ([`crate::integral::FRAC_BITS`] fractional bits) and accumulate exact
//! integers, so their maps are bit-identical.
//!
//! [`score_map_alternative`] covers the standard-deviation and edge-response
//! heuristics, which read the HR image only and rank *higher* values as more
//! informative.

mod alternative;
mod fast;
mod naive;

use alloc::vec::Vec;

use crate::integral::FRAC_BITS;
use crate::resample::ScaleFactor;
use crate::{Error, Raster, Result};

pub use alternative::score_map_alternative;
pub use fast::{score_map_fast, score_map_fast_with};
pub use naive::{score_map_naive, score_map_naive_with};

/// Score map for any metric: PSNR metrics use the integral-image path against
/// `lr`, the others look at `hr` alone.
pub fn score_map(hr: &Raster, lr: Option<&Raster>, geom: &PatchGeometry, metric: MetricKind) -> Result<ImportanceMap> {
    match (metric.needs_lr(), lr) {
        (true, Some(lr)) => score_map_fast_with(hr, lr, geom, metric),
        (true, None) => Err(Error::MetricMismatch("PSNR metrics need an LR image")),
        (false, _) => score_map_alternative(hr, metric, geom),
    }
}

/// Peak sample value of 8-bit images.
pub const PEAK: f64 = 255.0;

/// Score of a window whose squared error is exactly zero.
pub const PSNR_SENTINEL: f32 = f32::INFINITY;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MetricKind {
    /// PSNR of bilinear SR against HR, averaged over all channels.
    PsnrBilinear,
    /// Pooled standard deviation over all channels of the patch.
    Std0,
    /// Mean of the per-channel standard deviations.
    Std1,
    /// Standard deviation of the luma patch.
    Std2,
    /// Mean Sobel gradient magnitude of the luma patch.
    Sobel,
    /// Mean absolute 4-neighbour Laplacian response of the luma patch.
    Laplacian,
    /// PSNR of bilinear SR against HR, on luma only.
    PsnrBilinearLuma,
}

impl MetricKind {
    pub const ALL: [MetricKind; 7] = [
        MetricKind::PsnrBilinear,
        MetricKind::Std0,
        MetricKind::Std1,
        MetricKind::Std2,
        MetricKind::Sobel,
        MetricKind::Laplacian,
        MetricKind::PsnrBilinearLuma,
    ];

    /// Tag byte used by the binary map format.
    pub fn tag(self) -> u8 {
        match self {
            MetricKind::PsnrBilinear => 0,
            MetricKind::Std0 => 1,
            MetricKind::Std1 => 2,
            MetricKind::Std2 => 3,
            MetricKind::Sobel => 4,
            MetricKind::Laplacian => 5,
            MetricKind::PsnrBilinearLuma => 6,
        }
    }

    pub fn from_tag(tag: u8) -> Result<Self> {
        Self::ALL.into_iter().find(|m| m.tag() == tag).ok_or(Error::UnknownMetric(tag))
    }

    pub fn name(self) -> &'static str {
        match self {
            MetricKind::PsnrBilinear => "psnr-bilinear",
            MetricKind::Std0 => "std0",
            MetricKind::Std1 => "std1",
            MetricKind::Std2 => "std2",
            MetricKind::Sobel => "sobel",
            MetricKind::Laplacian => "laplacian",
            MetricKind::PsnrBilinearLuma => "psnr-bilinear-y",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == name)
    }

    /// PSNR metrics rank low scores as informative; the others rank high scores.
    pub fn lower_is_more_informative(self) -> bool {
        matches!(self, MetricKind::PsnrBilinear | MetricKind::PsnrBilinearLuma)
    }

    pub fn needs_lr(self) -> bool {
        self.lower_is_more_informative()
    }
}

impl core::fmt::Display for MetricKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

/// HR patch size, anchor stride and scale factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PatchGeometry {
    patch_size: usize,
    stride: usize,
    scale: ScaleFactor,
}

impl PatchGeometry {
    pub fn new(patch_size: usize, stride: usize, scale: ScaleFactor) -> Result<Self> {
        if patch_size == 0 {
            return Err(Error::InvalidGeometry("patch size must be positive"));
        }
        if !patch_size.is_multiple_of(scale.get()) {
            return Err(Error::InvalidGeometry("patch size must be divisible by the scale factor"));
        }
        if stride == 0 {
            return Err(Error::InvalidGeometry("stride must be at least 1"));
        }
        Ok(Self { patch_size, stride, scale })
    }

    /// Stride equal to the scale factor, so every anchor maps to an integral LR pixel.
    pub fn with_default_stride(patch_size: usize, scale: ScaleFactor) -> Result<Self> {
        Self::new(patch_size, scale.get(), scale)
    }

    #[inline]
    pub fn patch_size(&self) -> usize {
        self.patch_size
    }

    #[inline]
    pub fn stride(&self) -> usize {
        self.stride
    }

    #[inline]
    pub fn scale(&self) -> ScaleFactor {
        self.scale
    }

    /// Anchor grid `(rows, cols)` over a `width x height` HR image.
    pub fn grid(&self, width: usize, height: usize) -> Result<(usize, usize)> {
        let k = self.patch_size;
        if k > width || k > height {
            return Err(Error::InvalidGeometry("patch size exceeds image dimensions"));
        }
        Ok(((height - k) / self.stride + 1, (width - k) / self.stride + 1))
    }
}

/// Dense score raster over the anchor grid, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ImportanceMap {
    rows: usize,
    cols: usize,
    geometry: PatchGeometry,
    metric: MetricKind,
    scores: Vec<f32>,
}

impl ImportanceMap {
    /// Scores must be finite or `+inf`.
    pub fn new(
        rows: usize,
        cols: usize,
        geometry: PatchGeometry,
        metric: MetricKind,
        scores: Vec<f32>,
    ) -> Result<Self> {
        if scores.len() != rows * cols {
            return Err(Error::InvalidScores("score count does not match grid"));
        }
        if scores.iter().any(|s| s.is_nan() || *s == f32::NEG_INFINITY) {
            return Err(Error::InvalidScores("scores must be finite or +inf"));
        }
        Ok(Self { rows, cols, geometry, metric, scores })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.scores.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    #[inline]
    pub fn geometry(&self) -> PatchGeometry {
        self.geometry
    }

    #[inline]
    pub fn metric(&self) -> MetricKind {
        self.metric
    }

    #[inline]
    pub fn scores(&self) -> &[f32] {
        &self.scores
    }

    #[inline]
    pub fn score(&self, row: usize, col: usize) -> f32 {
        self.scores[row * self.cols + col]
    }

    /// HR top-left `(u, v)` of the anchor at flat index `index`.
    #[inline]
    pub fn anchor(&self, index: usize) -> (usize, usize) {
        let s = self.geometry.stride;
        ((index / self.cols) * s, (index % self.cols) * s)
    }

    /// Sort key where larger always means more informative.
    #[inline]
    pub fn informativeness(&self, index: usize) -> f32 {
        informativeness(self.metric, self.scores[index])
    }
}

#[inline]
pub(crate) fn informativeness(metric: MetricKind, score: f32) -> f32 {
    if metric.lower_is_more_informative() {
        -score
    } else {
        score
    }
}

/// Mean squared error between a real SR block and an 8-bit HR block, averaged
/// over every sample (all channels).
pub fn patch_mse(sr: &[f32], hr: &[u8]) -> Result<f64> {
    if sr.len() != hr.len() || sr.is_empty() {
        return Err(Error::ShapeMismatch);
    }
    let sum: f64 = sr
        .iter()
        .zip(hr)
        .map(|(&s, &h)| {
            let d = f64::from(s) - f64::from(h);
            d * d
        })
        .sum();
    Ok(sum / sr.len() as f64)
}

/// `10 log10(255^2 / mse)`; zero error maps to `+inf`.
///
/// # Panics
///
/// If `mse` is negative or NaN.
pub fn mse_to_psnr(mse: f64) -> f64 {
    assert!(mse >= 0.0, "mean squared error must be non-negative, got {mse}");
    if mse == 0.0 {
        return f64::INFINITY;
    }
    10.0 * libm::log10(PEAK * PEAK / mse)
}

/// PSNR from an exact squared-error total at `2^(2 * FRAC_BITS)` scale over `samples` values.
#[inline]
pub(crate) fn psnr_from_fixed_total(total: u128, samples: usize) -> f32 {
    if total == 0 {
        return PSNR_SENTINEL;
    }
    let scale = (1u64 << (2 * FRAC_BITS)) as f64;
    mse_to_psnr(total as f64 / (scale * samples as f64)) as f32
}
