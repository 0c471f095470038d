//! PNG output: 8-bit RGB (or RGBA when an alpha channel is supplied),
//! values clamped to [0, 1] and rounded to the nearest of 255 levels, no
//! gamma transform.

use std::path::Path;

use crate::error::{GeoError, Result};
use crate::image::Image;

fn quantize(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Write a 3-channel image as RGB.
pub fn write_png(image: &Image, path: &Path) -> Result<()> {
    if image.channels() != 3 {
        return Err(GeoError::Domain(format!(
            "png writer expects 3 channels, got {}",
            image.channels()
        )));
    }
    let pixels: Vec<u8> = image.data().iter().map(|&v| quantize(v)).collect();
    let buf = ::image::RgbImage::from_raw(image.width() as u32, image.height() as u32, pixels)
        .expect("pixel buffer matches dimensions");
    buf.save(path).map_err(|e| match e {
        ::image::ImageError::IoError(io) => GeoError::io(path, io),
        other => GeoError::Domain(format!("png encode failed: {other}")),
    })
}

/// Write RGB plus a separate alpha plane as RGBA.
pub fn write_png_rgba(image: &Image, alpha: &[f64], path: &Path) -> Result<()> {
    if image.channels() != 3 {
        return Err(GeoError::Domain(format!(
            "png writer expects 3 channels, got {}",
            image.channels()
        )));
    }
    if alpha.len() != image.width() * image.height() {
        return Err(GeoError::Domain("alpha plane size mismatch".into()));
    }
    let mut pixels = Vec::with_capacity(alpha.len() * 4);
    for (i, &a) in alpha.iter().enumerate() {
        pixels.push(quantize(image.data()[i * 3]));
        pixels.push(quantize(image.data()[i * 3 + 1]));
        pixels.push(quantize(image.data()[i * 3 + 2]));
        pixels.push(quantize(a));
    }
    let buf = ::image::RgbaImage::from_raw(image.width() as u32, image.height() as u32, pixels)
        .expect("pixel buffer matches dimensions");
    buf.save(path).map_err(|e| match e {
        ::image::ImageError::IoError(io) => GeoError::io(path, io),
        other => GeoError::Domain(format!("png encode failed: {other}")),
    })
}
