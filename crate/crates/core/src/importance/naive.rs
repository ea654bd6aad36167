use alloc::vec::Vec;

use super::fast::{prepare, HrPlane};
use super::{psnr_from_fixed_total, ImportanceMap, MetricKind, PatchGeometry};
use crate::integral::FixedRaster;
use crate::{Raster, Result};

// d <= 2^24, so d^2 <= 2^48 and 2^14 of them fit a u64.
const CHUNK: usize = 1 << 14;

/// Sliding-window PSNR map: every window is summed pixel by pixel.
///
/// Same contract and same SR quantisation as
/// [`score_map_fast`](super::score_map_fast); used as its oracle and as the
/// benchmark baseline.
pub fn score_map_naive(hr: &Raster, lr: &Raster, geom: &PatchGeometry) -> Result<ImportanceMap> {
    score_map_naive_with(hr, lr, geom, MetricKind::PsnrBilinear)
}

pub fn score_map_naive_with(
    hr: &Raster,
    lr: &Raster,
    geom: &PatchGeometry,
    metric: MetricKind,
) -> Result<ImportanceMap> {
    let prep = prepare(hr, lr, geom, metric)?;
    let hr_fixed = match &prep.hr {
        HrPlane::Bytes(r) => FixedRaster::from_bytes(r),
        HrPlane::Fixed(f) => f.clone(),
    };
    let (hr_px, sr_px) = (hr_fixed.data(), prep.sr.data());
    let c = prep.channels();
    let row_len = prep.sr.width() * c;
    let k = geom.patch_size();
    let stride = geom.stride();

    let mut scores = Vec::with_capacity(prep.rows * prep.cols);
    for r in 0..prep.rows {
        for col in 0..prep.cols {
            let (u, v) = (r * stride, col * stride);
            let mut total = 0u128;
            for i in 0..k {
                let start = (u + i) * row_len + v * c;
                let a = &hr_px[start..start + k * c];
                let b = &sr_px[start..start + k * c];
                for (ca, cb) in a.chunks(CHUNK).zip(b.chunks(CHUNK)) {
                    let part: u64 = ca
                        .iter()
                        .zip(cb)
                        .map(|(&x, &y)| {
                            let d = u64::from(x.abs_diff(y));
                            d * d
                        })
                        .sum();
                    total += u128::from(part);
                }
            }
            scores.push(psnr_from_fixed_total(total, c * k * k));
        }
    }
    ImportanceMap::new(prep.rows, prep.cols, *geom, metric, scores)
}
