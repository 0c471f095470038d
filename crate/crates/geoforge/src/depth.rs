//! Depth images (2.5D): per-pixel camera-space depth plus the camera that
//! produced them.

use crate::camera::Camera;
use crate::error::{GeoError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap {
    width: usize,
    height: usize,
    depths: Vec<f64>,
    camera: Camera,
}

impl DepthMap {
    /// Sentinel for pixels the scene does not cover.
    pub const NO_HIT: f64 = f64::INFINITY;

    #[inline]
    pub fn is_hit(depth: f64) -> bool {
        depth.is_finite()
    }

    pub fn new(width: usize, height: usize, depths: Vec<f64>, camera: Camera) -> Result<DepthMap> {
        if width == 0 || height == 0 {
            return Err(GeoError::Domain(format!("depth map size must be positive: {width}x{height}")));
        }
        if depths.len() != width * height {
            return Err(GeoError::Domain(format!(
                "{} depths for a {width}x{height} map",
                depths.len()
            )));
        }
        let pinhole = camera.is_pinhole();
        for (i, &d) in depths.iter().enumerate() {
            if !Self::is_hit(d) {
                continue;
            }
            if d.is_nan() || (pinhole && d <= 0.0) {
                return Err(GeoError::Domain(format!("invalid depth {d} at pixel {i}")));
            }
        }
        Ok(DepthMap {
            width,
            height,
            depths,
            camera,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn depths(&self) -> &[f64] {
        &self.depths
    }

    pub fn camera(&self) -> &Camera {
        &self.camera
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.depths[y * self.width + x]
    }
}
