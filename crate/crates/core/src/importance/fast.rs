use alloc::vec::Vec;

use super::{psnr_from_fixed_total, ImportanceMap, MetricKind, PatchGeometry};
use crate::integral::{FixedRaster, PlaneSource, WindowTable, FRAC_BITS};
use crate::raster::{float_rgb_to_luma, rgb_to_luma};
use crate::resample::bilinear_upscale;
use crate::{Error, Raster, Result};

/// HR side of the comparison: raw bytes, or a fixed-point luma plane.
pub(super) enum HrPlane<'a> {
    Bytes(&'a Raster),
    Fixed(FixedRaster),
}

impl HrPlane<'_> {
    pub(super) fn source(&self) -> PlaneSource<'_> {
        match self {
            HrPlane::Bytes(r) => PlaneSource::Bytes(r),
            HrPlane::Fixed(f) => PlaneSource::Fixed(f),
        }
    }
}

/// Inputs shared by the fast and naive paths, including the one fixed-point
/// quantisation of the SR reference.
pub(super) struct Prepared<'a> {
    pub hr: HrPlane<'a>,
    pub sr: FixedRaster,
    pub rows: usize,
    pub cols: usize,
}

impl Prepared<'_> {
    pub fn channels(&self) -> usize {
        self.sr.channels()
    }
}

pub(super) fn prepare<'a>(
    hr: &'a Raster,
    lr: &Raster,
    geom: &PatchGeometry,
    metric: MetricKind,
) -> Result<Prepared<'a>> {
    if !metric.lower_is_more_informative() {
        return Err(Error::MetricMismatch("bilinear PSNR scoring requires a PSNR metric"));
    }
    let s = geom.scale().get();
    if hr.channels() != lr.channels() {
        return Err(Error::ShapeMismatch);
    }
    if hr.width() != lr.width() * s || hr.height() != lr.height() * s {
        return Err(Error::DimensionMismatch {
            hr: (hr.width(), hr.height()),
            lr: (lr.width(), lr.height()),
            scale: s,
        });
    }
    let (rows, cols) = geom.grid(hr.width(), hr.height())?;
    let sr = bilinear_upscale(lr, geom.scale());
    let luma = metric == MetricKind::PsnrBilinearLuma && hr.channels() == 3;
    let (hr, sr) = if luma {
        let hr_y = FixedRaster::from_float(&rgb_to_luma(hr)?)?;
        let sr_y = FixedRaster::from_float(&float_rgb_to_luma(&sr)?)?;
        (HrPlane::Fixed(hr_y), sr_y)
    } else {
        (HrPlane::Bytes(hr), FixedRaster::from_float(&sr)?)
    };
    Ok(Prepared { hr, sr, rows, cols })
}

/// PSNR map over all channels via three integral images per channel.
pub fn score_map_fast(hr: &Raster, lr: &Raster, geom: &PatchGeometry) -> Result<ImportanceMap> {
    score_map_fast_with(hr, lr, geom, MetricKind::PsnrBilinear)
}

/// As [`score_map_fast`], with `metric` selecting all-channel or luma PSNR.
pub fn score_map_fast_with(
    hr: &Raster,
    lr: &Raster,
    geom: &PatchGeometry,
    metric: MetricKind,
) -> Result<ImportanceMap> {
    let prep = prepare(hr, lr, geom, metric)?;
    let (rows, cols) = (prep.rows, prep.cols);
    let k = geom.patch_size();
    let stride = geom.stride();
    let hr_src = prep.hr.source();
    let sr_src = PlaneSource::Fixed(&prep.sr);

    // Squared-error totals at 2^(2 * FRAC_BITS) scale.
    let mut totals: Vec<i128> = alloc::vec![0; rows * cols];
    for ch in 0..prep.channels() {
        let terms: [(PlaneSource<'_>, PlaneSource<'_>, i128); 3] =
            [(hr_src, hr_src, 1), (sr_src, sr_src, 1), (hr_src, sr_src, -2)];
        for (a, b, weight) in terms {
            let shift = 2 * FRAC_BITS - (a.frac_bits() + b.frac_bits());
            let table = WindowTable::of_product(a, b, ch, k, stride)?;
            table.for_each_window(rows, cols, stride, |i, sum| {
                totals[i] += weight * ((sum << shift) as i128);
            });
        }
    }

    let samples = prep.channels() * k * k;
    let scores = totals
        .into_iter()
        .map(|t| {
            debug_assert!(t >= 0, "squared error total went negative");
            psnr_from_fixed_total(t as u128, samples)
        })
        .collect();
    ImportanceMap::new(rows, cols, *geom, metric, scores)
}
