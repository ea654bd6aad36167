//! Rank-normalised grayscale rendering of an [`ImportanceMap`].
//!
//! One pixel per anchor. Finite scores are ranked by informativeness (ties take
//! their average rank) and mapped linearly onto `0..=255`, so the most
//! informative anchor is brightest and a single outlier cannot flatten the
//! rest. The `+inf` PSNR sentinel renders black.

use alloc::vec::Vec;

use crate::raster::quantize_sample;
use crate::{Error, ImportanceMap, Raster, Result};

/// Brightness for a map whose finite scores are all equal.
pub const MID_GRAY: u8 = 128;

pub fn heatmap(map: &ImportanceMap) -> Result<Raster> {
    if map.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let mut finite: Vec<(f32, usize)> =
        (0..map.len()).filter(|&i| map.scores()[i].is_finite()).map(|i| (map.informativeness(i) + 0.0, i)).collect();
    finite.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut pixels = alloc::vec![0u8; map.len()];
    let last = finite.len().saturating_sub(1);
    let mut start = 0;
    while start < finite.len() {
        let mut end = start + 1;
        while end < finite.len() && finite[end].0 == finite[start].0 {
            end += 1;
        }
        // Sum of ranks start..end, halved later: avoids a fractional average.
        let rank_sum2 = (start + end - 1) as f64;
        let value = if last == 0 { MID_GRAY } else { quantize_sample(255.0 * rank_sum2 / (2.0 * last as f64)) };
        for &(_, i) in &finite[start..end] {
            pixels[i] = value;
        }
        start = end;
    }
    Raster::new(map.cols(), map.rows(), 1, pixels)
}
