//! Image containers.
//!
//! Samples are row-major and channel-interleaved (`RGBRGB...` for colour,
//! one value per pixel for grayscale).

use alloc::vec::Vec;

use crate::{Error, Result};

fn check_shape(width: usize, height: usize, channels: usize, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::EmptyImage);
    }
    if channels != 1 && channels != 3 {
        return Err(Error::UnsupportedChannels(channels));
    }
    let expected = width * height * channels;
    if len != expected {
        return Err(Error::BufferLength { expected, actual: len });
    }
    Ok(())
}

/// An 8-bit image with 1 (gray) or 3 (RGB) channels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Raster {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<u8>,
}

impl Raster {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<u8>) -> Result<Self> {
        check_shape(width, height, channels, data.len())?;
        Ok(Self { width, height, channels, data })
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: u8) -> Result<Self> {
        Self::new(width, height, channels, alloc::vec![value; width * height * channels])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> u8,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height * channels);
        for row in 0..height {
            for col in 0..width {
                for c in 0..channels {
                    data.push(f(row, col, c));
                }
            }
        }
        Self::new(width, height, channels, data)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn channels(&self) -> usize {
        self.channels
    }

    #[inline]
    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    #[inline]
    pub fn sample(&self, row: usize, col: usize, channel: usize) -> u8 {
        self.data[(row * self.width + col) * self.channels + channel]
    }

    /// Copies the `width` x `height` block whose top-left pixel is (`top`, `left`).
    pub fn crop(&self, top: usize, left: usize, width: usize, height: usize) -> Result<Raster> {
        if width == 0 || height == 0 || top + height > self.height || left + width > self.width {
            return Err(Error::WindowOutOfBounds);
        }
        let row_len = width * self.channels;
        let mut data = Vec::with_capacity(row_len * height);
        for row in top..top + height {
            let start = (row * self.width + left) * self.channels;
            data.extend_from_slice(&self.data[start..start + row_len]);
        }
        Raster::new(width, height, self.channels, data)
    }

    pub fn to_float(&self) -> FloatRaster {
        FloatRaster {
            width: self.width,
            height: self.height,
            channels: self.channels,
            data: self.data.iter().map(|&v| f32::from(v)).collect(),
        }
    }
}

/// A real-valued image, used for resampled intermediates and luma planes.
///
/// Every stored sample is finite.
#[derive(Clone, Debug, PartialEq)]
pub struct FloatRaster {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f32>,
}

impl FloatRaster {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f32>) -> Result<Self> {
        check_shape(width, height, channels, data.len())?;
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteSample);
        }
        Ok(Self { width, height, channels, data })
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn channels(&self) -> usize {
        self.channels
    }

    #[inline]
    pub fn data(&self) -> &[f32] {
        &self.data
    }

    #[inline]
    pub fn sample(&self, row: usize, col: usize, channel: usize) -> f32 {
        self.data[(row * self.width + col) * self.channels + channel]
    }

    /// Clamps to [0, 255] and rounds half away from zero.
    pub fn quantize(&self) -> Raster {
        Raster {
            width: self.width,
            height: self.height,
            channels: self.channels,
            data: self.data.iter().map(|&v| quantize_sample(f64::from(v))).collect(),
        }
    }
}

/// Clamp to the 8-bit range, then round half away from zero.
#[inline]
pub fn quantize_sample(v: f64) -> u8 {
    libm::round(v.clamp(0.0, 255.0)) as u8
}

/// Studio-swing BT.601 luma, `16 + (65.481 R + 128.553 G + 24.966 B) / 255`.
#[inline]
pub fn luma(r: f64, g: f64, b: f64) -> f64 {
    16.0 + (65.481 * r + 128.553 * g + 24.966 * b) / 255.0
}

/// Converts an RGB raster to its single-channel luma plane (range [16, 235]).
pub fn rgb_to_luma(raster: &Raster) -> Result<FloatRaster> {
    if raster.channels != 3 {
        return Err(Error::UnsupportedChannels(raster.channels));
    }
    let data =
        raster.data.chunks_exact(3).map(|p| luma(f64::from(p[0]), f64::from(p[1]), f64::from(p[2])) as f32).collect();
    FloatRaster::new(raster.width, raster.height, 1, data)
}

/// Luma of a real-valued RGB raster, with the same coefficients as [`rgb_to_luma`].
pub fn float_rgb_to_luma(raster: &FloatRaster) -> Result<FloatRaster> {
    if raster.channels != 3 {
        return Err(Error::UnsupportedChannels(raster.channels));
    }
    let data =
        raster.data.chunks_exact(3).map(|p| luma(f64::from(p[0]), f64::from(p[1]), f64::from(p[2])) as f32).collect();
    FloatRaster::new(raster.width, raster.height, 1, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn rejects_bad_buffers() {
        assert_eq!(Raster::new(2, 2, 3, vec![0; 11]), Err(Error::BufferLength { expected: 12, actual: 11 }));
        assert_eq!(Raster::new(0, 2, 1, vec![]), Err(Error::EmptyImage));
        assert_eq!(Raster::new(1, 1, 4, vec![0; 4]), Err(Error::UnsupportedChannels(4)));
        assert_eq!(FloatRaster::new(1, 1, 1, vec![f32::NAN]), Err(Error::NonFiniteSample));
    }

    #[test]
    fn luma_reference_points() {
        let px = |r, g, b| rgb_to_luma(&Raster::new(1, 1, 3, vec![r, g, b]).unwrap()).unwrap().data()[0];
        assert!((px(255, 255, 255) - 235.0).abs() < 1e-4);
        assert!((px(0, 0, 0) - 16.0).abs() < 1e-6);
        assert!((px(255, 0, 0) - 81.481).abs() < 1e-4);
    }

    #[test]
    fn luma_requires_rgb() {
        let gray = Raster::filled(2, 2, 1, 9).unwrap();
        assert_eq!(rgb_to_luma(&gray), Err(Error::UnsupportedChannels(1)));
    }

    #[test]
    fn quantize_clamps_and_rounds_half_away() {
        let f = FloatRaster::new(4, 1, 1, vec![254.5, -3.2, 0.5, 300.0]).unwrap();
        assert_eq!(f.quantize().data(), &[255, 0, 1, 255]);
    }

    #[test]
    fn crop_copies_block() {
        let r = Raster::from_fn(4, 3, 1, |row, col, _| (row * 4 + col) as u8).unwrap();
        let c = r.crop(1, 2, 2, 2).unwrap();
        assert_eq!(c.data(), &[6, 7, 10, 11]);
        assert_eq!(r.crop(2, 0, 1, 2), Err(Error::WindowOutOfBounds));
    }

    proptest! {
        #[test]
        fn luma_stays_in_studio_range(r in 0u8..=255, g in 0u8..=255, b in 0u8..=255) {
            let y = luma(f64::from(r), f64::from(g), f64::from(b));
            prop_assert!((16.0 - 1e-9..=235.0 + 1e-9).contains(&y));
        }
    }
}
