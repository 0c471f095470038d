//! Dense H x W x C real image buffers, row-major with interleaved channels.

use crate::error::{GeoError, Result};
use crate::math::Vec3;

#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f64>,
}

impl Image {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f64>) -> Result<Image> {
        if data.len() != width * height * channels {
            return Err(GeoError::Domain(format!(
                "{} samples for a {width}x{height}x{channels} image",
                data.len()
            )));
        }
        Ok(Image {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn zeros(width: usize, height: usize, channels: usize) -> Image {
        Image {
            width,
            height,
            channels,
            data: vec![0.0; width * height * channels],
        }
    }

    /// Constant-color 3-channel image.
    pub fn filled(width: usize, height: usize, color: Vec3) -> Image {
        let mut img = Image::zeros(width, height, 3);
        for p in 0..width * height {
            img.data[p * 3] = color.x;
            img.data[p * 3 + 1] = color.y;
            img.data[p * 3 + 2] = color.z;
        }
        img
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, c: usize) -> usize {
        (y * self.width + x) * self.channels + c
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> f64 {
        self.data[self.index(x, y, c)]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, c: usize, v: f64) {
        let i = self.index(x, y, c);
        self.data[i] = v;
    }

    /// Read a pixel of a 3-channel image as a vector.
    #[inline]
    pub fn pixel3(&self, x: usize, y: usize) -> Vec3 {
        debug_assert!(self.channels >= 3);
        Vec3::new(self.get(x, y, 0), self.get(x, y, 1), self.get(x, y, 2))
    }

    #[inline]
    pub fn set_pixel3(&mut self, x: usize, y: usize, v: Vec3) {
        self.set(x, y, 0, v.x);
        self.set(x, y, 1, v.y);
        self.set(x, y, 2, v.z);
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}
