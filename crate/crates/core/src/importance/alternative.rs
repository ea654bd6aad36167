//! HR-only heuristics: windowed standard deviation and mean edge response.
//!
//! Standard deviations are population (divide-by-n) and computed from exact
//! integer tables of `x` and `x^2`. Luma for `std2` uses the integer numerator
//! `65481 R + 128553 G + 24966 B` (luma minus 16, times 255000), so it stays exact
//! too. Edge responses are real-valued and go through a floating table.

use alloc::vec::Vec;

use super::{ImportanceMap, MetricKind, PatchGeometry};
use crate::integral::{ExactIntegral, IntegralImage, ProductPlane};
use crate::raster::luma;
use crate::{Error, Raster, Result};

const LUMA_WEIGHTS: [u64; 3] = [65481, 128553, 24966];
const LUMA_DENOM: f64 = 255_000.0;

/// Score map for a non-PSNR metric; higher scores mean more informative.
///
/// On single-channel input, the luma-based metrics read the channel directly.
pub fn score_map_alternative(hr: &Raster, metric: MetricKind, geom: &PatchGeometry) -> Result<ImportanceMap> {
    let (rows, cols) = geom.grid(hr.width(), hr.height())?;
    let grid = Grid { rows, cols, stride: geom.stride(), k: geom.patch_size() };
    let scores = match metric {
        MetricKind::PsnrBilinear | MetricKind::PsnrBilinearLuma => {
            return Err(Error::MetricMismatch("PSNR metrics need an LR image; use score_map_fast"));
        }
        MetricKind::Std0 => pooled_std(hr, &grid)?,
        MetricKind::Std1 => mean_channel_std(hr, &grid)?,
        MetricKind::Std2 => luma_std(hr, &grid)?,
        MetricKind::Sobel => mean_response(&sobel_magnitude(&intensity(hr), hr.width(), hr.height()), hr, &grid)?,
        MetricKind::Laplacian => mean_response(&laplacian_abs(&intensity(hr), hr.width(), hr.height()), hr, &grid)?,
    };
    ImportanceMap::new(rows, cols, *geom, metric, scores)
}

struct Grid {
    rows: usize,
    cols: usize,
    stride: usize,
    k: usize,
}

fn plane(hr: &Raster, max_value: u64, data: Vec<u64>) -> ProductPlane {
    ProductPlane { width: hr.width(), height: hr.height(), scale_bits: 0, max_value, data }
}

/// Windowed population standard deviation from exact sums of `x` and `x^2`,
/// `n` samples per window.
fn windowed_std(sum: &ProductPlane, sum_sq: &ProductPlane, grid: &Grid, n: u128) -> Result<Vec<f64>> {
    let s1 = ExactIntegral::build(sum)?;
    let s2 = ExactIntegral::build(sum_sq)?;
    let mut first = alloc::vec![0u128; grid.rows * grid.cols];
    s1.for_each_window(grid.rows, grid.cols, grid.stride, grid.k, |i, s| first[i] = s);
    let mut out = alloc::vec![0.0; first.len()];
    s2.for_each_window(grid.rows, grid.cols, grid.stride, grid.k, |i, s| {
        // n * sum(x^2) - (sum x)^2 >= 0 by Cauchy-Schwarz
        let numer = n * s - first[i] * first[i];
        out[i] = libm::sqrt(numer as f64) / n as f64;
    });
    Ok(out)
}

fn pooled_std(hr: &Raster, grid: &Grid) -> Result<Vec<f32>> {
    let c = hr.channels();
    let px = hr.data().chunks_exact(c);
    let sum = px.clone().map(|p| p.iter().map(|&v| u64::from(v)).sum()).collect();
    let sum_sq = px.map(|p| p.iter().map(|&v| u64::from(v).pow(2)).sum()).collect();
    let c64 = c as u64;
    let n = (c * grid.k * grid.k) as u128;
    let std = windowed_std(&plane(hr, 255 * c64, sum), &plane(hr, 65025 * c64, sum_sq), grid, n)?;
    Ok(std.into_iter().map(|v| v as f32).collect())
}

fn mean_channel_std(hr: &Raster, grid: &Grid) -> Result<Vec<f32>> {
    let c = hr.channels();
    let n = (grid.k * grid.k) as u128;
    let mut acc = alloc::vec![0.0f64; grid.rows * grid.cols];
    for ch in 0..c {
        let values = hr.data()[ch..].iter().step_by(c);
        let sum = values.clone().map(|&v| u64::from(v)).collect();
        let sum_sq = values.map(|&v| u64::from(v).pow(2)).collect();
        let std = windowed_std(&plane(hr, 255, sum), &plane(hr, 65025, sum_sq), grid, n)?;
        for (a, s) in acc.iter_mut().zip(std) {
            *a += s;
        }
    }
    Ok(acc.into_iter().map(|v| (v / c as f64) as f32).collect())
}

fn luma_std(hr: &Raster, grid: &Grid) -> Result<Vec<f32>> {
    if hr.channels() == 1 {
        return pooled_std(hr, grid);
    }
    let numer: Vec<u64> =
        hr.data().chunks_exact(3).map(|p| p.iter().zip(LUMA_WEIGHTS).map(|(&v, w)| u64::from(v) * w).sum()).collect();
    let max = 255 * LUMA_WEIGHTS.iter().sum::<u64>();
    let sum_sq = numer.iter().map(|&v| v * v).collect();
    let n = (grid.k * grid.k) as u128;
    let std = windowed_std(&plane(hr, max, numer), &plane(hr, max * max, sum_sq), grid, n)?;
    Ok(std.into_iter().map(|v| (v / LUMA_DENOM) as f32).collect())
}

/// Luma for RGB, the channel itself for gray.
pub(crate) fn intensity(hr: &Raster) -> Vec<f64> {
    match hr.channels() {
        3 => hr.data().chunks_exact(3).map(|p| luma(f64::from(p[0]), f64::from(p[1]), f64::from(p[2]))).collect(),
        _ => hr.data().iter().map(|&v| f64::from(v)).collect(),
    }
}

#[inline]
fn clamped(img: &[f64], width: usize, height: usize, row: isize, col: isize) -> f64 {
    let r = row.clamp(0, height as isize - 1) as usize;
    let c = col.clamp(0, width as isize - 1) as usize;
    img[r * width + c]
}

/// 3x3 Sobel gradient magnitude, clamp-to-edge.
pub(crate) fn sobel_magnitude(img: &[f64], width: usize, height: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(img.len());
    for row in 0..height as isize {
        for col in 0..width as isize {
            let p = |dr: isize, dc: isize| clamped(img, width, height, row + dr, col + dc);
            let gx = (p(-1, 1) + 2.0 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2.0 * p(0, -1) + p(1, -1));
            let gy = (p(1, -1) + 2.0 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2.0 * p(-1, 0) + p(-1, 1));
            out.push(libm::sqrt(gx * gx + gy * gy));
        }
    }
    out
}

/// Absolute 4-neighbour Laplacian, clamp-to-edge.
pub(crate) fn laplacian_abs(img: &[f64], width: usize, height: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(img.len());
    for row in 0..height as isize {
        for col in 0..width as isize {
            let p = |dr: isize, dc: isize| clamped(img, width, height, row + dr, col + dc);
            out.push((p(-1, 0) + p(1, 0) + p(0, -1) + p(0, 1) - 4.0 * p(0, 0)).abs());
        }
    }
    out
}

fn mean_response(response: &[f64], hr: &Raster, grid: &Grid) -> Result<Vec<f32>> {
    let table = IntegralImage::from_real(hr.width(), hr.height(), response)?;
    let area = (grid.k * grid.k) as f64;
    let mut out = Vec::with_capacity(grid.rows * grid.cols);
    for r in 0..grid.rows {
        for c in 0..grid.cols {
            let sum = table.rect_sum_unchecked(r * grid.stride, c * grid.stride, grid.k, grid.k);
            // cancellation in the four-corner sum can leave a tiny negative residue
            out.push((sum / area).max(0.0) as f32);
        }
    }
    Ok(out)
}
