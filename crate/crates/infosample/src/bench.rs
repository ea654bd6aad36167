//! Naive versus integral-image timing.
//!
//! Both maps are computed once and compared score by score before any timing;
//! a speedup for a wrong answer is not reported.

use std::time::{Duration, Instant};

use infosample_core::importance::{score_map_fast, score_map_naive};
use infosample_core::{ImportanceMap, PatchGeometry, Raster};
use serde::Serialize;

use crate::{Error, Result};

#[derive(Clone, Debug, Serialize)]
pub struct BenchReport {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub scale: usize,
    pub patch_size: usize,
    pub stride: usize,
    pub anchors: usize,
    pub repeats: usize,
    /// Best wall time over the repeats, in milliseconds.
    pub naive_ms: f64,
    pub fast_ms: f64,
    pub speedup: f64,
}

impl std::fmt::Display for BenchReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "{}x{}x{} s={} k={} stride={} anchors={} repeats={}",
            self.width,
            self.height,
            self.channels,
            self.scale,
            self.patch_size,
            self.stride,
            self.anchors,
            self.repeats
        )?;
        writeln!(f, "naive: {:.3} ms", self.naive_ms)?;
        writeln!(f, "fast:  {:.3} ms", self.fast_ms)?;
        write!(f, "speedup: {:.1}x", self.speedup)
    }
}

/// Fails with [`Error::OracleMismatch`] at the first differing anchor.
pub fn check_equal(fast: &ImportanceMap, naive: &ImportanceMap) -> Result<()> {
    if (fast.rows(), fast.cols()) != (naive.rows(), naive.cols()) {
        return Err(Error::OracleMismatch { index: 0, fast: f32::NAN, naive: f32::NAN });
    }
    match fast.scores().iter().zip(naive.scores()).position(|(a, b)| a.to_bits() != b.to_bits()) {
        Some(index) => Err(Error::OracleMismatch { index, fast: fast.scores()[index], naive: naive.scores()[index] }),
        None => Ok(()),
    }
}

/// Smallest wall time of `repeats` calls.
pub fn best_of<T>(repeats: usize, mut f: impl FnMut() -> T) -> Duration {
    (0..repeats.max(1))
        .map(|_| {
            let start = Instant::now();
            std::hint::black_box(f());
            start.elapsed()
        })
        .min()
        .unwrap()
}

pub fn run_bench(hr: &Raster, lr: &Raster, geom: &PatchGeometry, repeats: usize) -> Result<BenchReport> {
    let fast = score_map_fast(hr, lr, geom)?;
    let naive = score_map_naive(hr, lr, geom)?;
    check_equal(&fast, &naive)?;
    let naive_time = best_of(repeats, || score_map_naive(hr, lr, geom));
    let fast_time = best_of(repeats, || score_map_fast(hr, lr, geom));
    let ms = |d: Duration| d.as_secs_f64() * 1e3;
    Ok(BenchReport {
        width: hr.width(),
        height: hr.height(),
        channels: hr.channels(),
        scale: geom.scale().get(),
        patch_size: geom.patch_size(),
        stride: geom.stride(),
        anchors: fast.len(),
        repeats: repeats.max(1),
        naive_ms: ms(naive_time),
        fast_ms: ms(fast_time),
        speedup: naive_time.as_secs_f64() / fast_time.as_secs_f64().max(1e-9),
    })
}
