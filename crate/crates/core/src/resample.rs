//! Resampling kernels.
//!
//! Both kernels use half-pixel-centre alignment (output sample `o` sits at
//! input coordinate `(o + 0.5) / ratio - 0.5`) and clamp-to-edge borders.

use alloc::vec::Vec;

use crate::raster::quantize_sample;
use crate::{Error, FloatRaster, Raster, Result};

/// Integer super-resolution scale factor, one of 2, 3 or 4.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ScaleFactor(u8);

impl ScaleFactor {
    pub const SUPPORTED: [usize; 3] = [2, 3, 4];

    pub fn new(s: usize) -> Result<Self> {
        if Self::SUPPORTED.contains(&s) {
            Ok(Self(s as u8))
        } else {
            Err(Error::UnsupportedScale(s))
        }
    }

    #[inline]
    pub fn get(self) -> usize {
        usize::from(self.0)
    }
}

/// Keys cubic convolution kernel with `a = -0.5`.
#[inline]
pub fn keys_kernel(x: f64) -> f64 {
    const A: f64 = -0.5;
    let x = x.abs();
    if x < 1.0 {
        ((A + 2.0) * x - (A + 3.0)) * x * x + 1.0
    } else if x < 2.0 {
        ((A * x - 5.0 * A) * x + 8.0 * A) * x - 4.0 * A
    } else {
        0.0
    }
}

struct Taps {
    index: Vec<usize>,
    weight: Vec<f64>,
}

/// Antialiased cubic taps for one output coordinate: the kernel is stretched by
/// `scale` so it spans `4 * scale` input samples, then normalised to sum to one.
fn cubic_taps(out_index: usize, scale: usize, in_len: usize) -> Taps {
    let s = scale as f64;
    let center = (out_index as f64 + 0.5) * s - 0.5;
    let reach = 2.0 * s;
    let first = libm::floor(center - reach) as isize;
    let last = libm::ceil(center + reach) as isize;
    let mut index = Vec::new();
    let mut weight = Vec::new();
    for i in first..=last {
        let w = keys_kernel((i as f64 - center) / s);
        if w != 0.0 {
            index.push(i.clamp(0, in_len as isize - 1) as usize);
            weight.push(w);
        }
    }
    let total: f64 = weight.iter().sum();
    for w in &mut weight {
        *w /= total;
    }
    Taps { index, weight }
}

fn bicubic_downscale_real(hr: &Raster, s: ScaleFactor) -> Result<(usize, usize, Vec<f64>)> {
    let scale = s.get();
    let (w, h, c) = (hr.width(), hr.height(), hr.channels());
    if w % scale != 0 || h % scale != 0 {
        return Err(Error::NotDivisible { width: w, height: h, scale });
    }
    let (ow, oh) = (w / scale, h / scale);
    let col_taps: Vec<Taps> = (0..ow).map(|o| cubic_taps(o, scale, w)).collect();
    let row_taps: Vec<Taps> = (0..oh).map(|o| cubic_taps(o, scale, h)).collect();

    // horizontal pass: h x ow x c
    let src = hr.data();
    let mut horiz = alloc::vec![0.0f64; h * ow * c];
    for row in 0..h {
        let src_row = &src[row * w * c..(row + 1) * w * c];
        let dst_row = &mut horiz[row * ow * c..(row + 1) * ow * c];
        for (ox, taps) in col_taps.iter().enumerate() {
            for ch in 0..c {
                let mut acc = 0.0;
                for (&ix, &wt) in taps.index.iter().zip(&taps.weight) {
                    acc += wt * f64::from(src_row[ix * c + ch]);
                }
                dst_row[ox * c + ch] = acc;
            }
        }
    }

    let mut out = alloc::vec![0.0f64; oh * ow * c];
    for (oy, taps) in row_taps.iter().enumerate() {
        let dst_row = &mut out[oy * ow * c..(oy + 1) * ow * c];
        for (&iy, &wt) in taps.index.iter().zip(&taps.weight) {
            let src_row = &horiz[iy * ow * c..(iy + 1) * ow * c];
            for (d, &v) in dst_row.iter_mut().zip(src_row) {
                *d += wt * v;
            }
        }
    }
    Ok((ow, oh, out))
}

/// Synthesises the LR image: antialiased Keys bicubic, then clamp and round.
///
/// HR width and height must be multiples of `s`; see [`crop_to_multiple`].
pub fn bicubic_downscale(hr: &Raster, s: ScaleFactor) -> Result<Raster> {
    let (ow, oh, real) = bicubic_downscale_real(hr, s)?;
    let data = real.into_iter().map(quantize_sample).collect();
    Raster::new(ow, oh, hr.channels(), data)
}

/// Bilinear upscale without quantisation.
pub fn bilinear_upscale(lr: &Raster, s: ScaleFactor) -> FloatRaster {
    upscale_by(lr, s.get())
}

struct LerpTap {
    lo: usize,
    hi: usize,
    t: f64,
}

fn lerp_taps(out_len: usize, factor: usize, in_len: usize) -> Vec<LerpTap> {
    let f = factor as f64;
    (0..out_len)
        .map(|o| {
            let src = (o as f64 + 0.5) / f - 0.5;
            let base = libm::floor(src);
            let t = src - base;
            let base = base as isize;
            let clamp = |i: isize| i.clamp(0, in_len as isize - 1) as usize;
            LerpTap { lo: clamp(base), hi: clamp(base + 1), t }
        })
        .collect()
}

/// `a + t * (b - a)` reproduces constants exactly and stays within `[min(a, b), max(a, b)]`.
#[inline]
fn lerp(a: f64, b: f64, t: f64) -> f64 {
    a + t * (b - a)
}

pub(crate) fn upscale_by(lr: &Raster, factor: usize) -> FloatRaster {
    let (w, h, c) = (lr.width(), lr.height(), lr.channels());
    let (ow, oh) = (w * factor, h * factor);
    let xs = lerp_taps(ow, factor, w);
    let ys = lerp_taps(oh, factor, h);
    let src = lr.data();
    let horizontal = |row: usize, out: &mut Vec<f64>| {
        let line = &src[row * w * c..(row + 1) * w * c];
        out.clear();
        for x in &xs {
            for ch in 0..c {
                out.push(lerp(f64::from(line[x.lo * c + ch]), f64::from(line[x.hi * c + ch]), x.t));
            }
        }
    };
    // Horizontally interpolated LR rows; output rows walk them in order.
    let (mut top_row, mut top) = (usize::MAX, Vec::with_capacity(ow * c));
    let (mut bot_row, mut bot) = (usize::MAX, Vec::with_capacity(ow * c));
    let mut data = Vec::with_capacity(ow * oh * c);
    for y in &ys {
        if top_row != y.lo {
            if bot_row == y.lo {
                core::mem::swap(&mut top, &mut bot);
                bot_row = usize::MAX;
            } else {
                horizontal(y.lo, &mut top);
            }
            top_row = y.lo;
        }
        if bot_row != y.hi {
            horizontal(y.hi, &mut bot);
            bot_row = y.hi;
        }
        data.extend(top.iter().zip(&bot).map(|(&upper, &lower)| lerp(upper, lower, y.t) as f32));
    }
    FloatRaster::new(ow, oh, c, data).expect("upscale preserves shape and finiteness")
}

/// Top-left sub-image whose sides are the largest multiples of `s`.
pub fn crop_to_multiple(img: &Raster, s: ScaleFactor) -> Result<Raster> {
    let scale = s.get();
    let (w, h) = (img.width(), img.height());
    if w < scale || h < scale {
        return Err(Error::TooSmall { width: w, height: h, scale });
    }
    let (cw, ch) = (w - w % scale, h - h % scale);
    if (cw, ch) == (w, h) {
        return Ok(img.clone());
    }
    img.crop(0, 0, cw, ch)
}
