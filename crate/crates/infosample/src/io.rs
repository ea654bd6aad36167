//! 8-bit PNG reading and writing.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use infosample_core::{FloatRaster, Raster};
use png::{BitDepth, ColorType, Transformations};

use crate::{Error, Result};

/// Loads an 8-bit grayscale or RGB PNG. Palette images are expanded to RGB;
/// alpha and 16-bit samples are rejected.
pub fn load_image(path: &Path) -> Result<Raster> {
    let bad = |message: &str| Error::Image { path: path.to_path_buf(), message: message.into() };
    let file = File::open(path).map_err(Error::io(path))?;
    let mut decoder = png::Decoder::new(BufReader::new(file));
    decoder.set_transformations(Transformations::EXPAND);
    let mut reader = decoder.read_info().map_err(|e| match e {
        png::DecodingError::IoError(source) => Error::Io { path: path.to_path_buf(), source },
        other => bad(&other.to_string()),
    })?;
    let info = reader.info();
    if info.bit_depth == BitDepth::Sixteen {
        return Err(bad("unsupported bit depth 16 (expected 8)"));
    }
    let (color, depth) = reader.output_color_type();
    if depth != BitDepth::Eight {
        return Err(bad("unsupported bit depth"));
    }
    let channels = match color {
        ColorType::Grayscale => 1,
        ColorType::Rgb => 3,
        ColorType::GrayscaleAlpha | ColorType::Rgba => return Err(bad("alpha channel is not supported")),
        ColorType::Indexed => return Err(bad("unexpanded palette")),
    };
    let size = reader.output_buffer_size().ok_or_else(|| bad("image too large"))?;
    let mut buf = vec![0; size];
    let frame = reader.next_frame(&mut buf).map_err(|e| bad(&e.to_string()))?;
    let (w, h) = (frame.width as usize, frame.height as usize);
    let row = w * channels;
    let data = if frame.line_size == row {
        buf.truncate(row * h);
        buf
    } else {
        buf.chunks(frame.line_size).take(h).flat_map(|line| &line[..row]).copied().collect()
    };
    Ok(Raster::new(w, h, channels, data)?)
}

/// Writes a lossless 8-bit PNG, grayscale or RGB by channel count.
pub fn save_image(raster: &Raster, path: &Path) -> Result<()> {
    let color = match raster.channels() {
        1 => ColorType::Grayscale,
        _ => ColorType::Rgb,
    };
    let (w, h) = (raster.width() as u32, raster.height() as u32);
    let file = File::create(path).map_err(Error::io(path))?;
    let mut encoder = png::Encoder::new(BufWriter::new(file), w, h);
    encoder.set_color(color);
    encoder.set_depth(BitDepth::Eight);
    let encoding = |e: png::EncodingError| match e {
        png::EncodingError::IoError(source) => Error::Io { path: path.to_path_buf(), source },
        other => Error::Image { path: path.to_path_buf(), message: other.to_string() },
    };
    let mut writer = encoder.write_header().map_err(encoding)?;
    writer.write_image_data(raster.data()).map_err(encoding)?;
    writer.finish().map_err(encoding)
}

/// Clamps, rounds half away from zero, and writes.
pub fn save_float_image(raster: &FloatRaster, path: &Path) -> Result<()> {
    save_image(&raster.quantize(), path)
}
