//! Light sources for the shading stage.

use crate::error::{GeoError, Result};
use crate::math::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LightKind {
    Ambient,
    Directional,
}

/// One light. `direction` is the unit vector pointing from the scene toward
/// the light (world space); ambient lights ignore it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Light {
    pub kind: LightKind,
    pub color: Vec3,
    pub direction: Vec3,
    pub specular_color: Vec3,
    pub shininess: f64,
}

impl Light {
    pub fn ambient(color: Vec3) -> Light {
        Light {
            kind: LightKind::Ambient,
            color,
            direction: Vec3::new(0.0, 0.0, 1.0),
            specular_color: Vec3::ZERO,
            shininess: 1.0,
        }
    }

    /// Directional light; the direction is normalized and must be non-zero.
    pub fn directional(color: Vec3, direction: Vec3) -> Result<Light> {
        let direction = direction
            .try_normalize()
            .ok_or_else(|| GeoError::Domain("light direction must be non-zero".into()))?;
        Ok(Light {
            kind: LightKind::Directional,
            color,
            direction,
            specular_color: Vec3::ZERO,
            shininess: 1.0,
        })
    }

    pub fn with_specular(mut self, specular_color: Vec3, shininess: f64) -> Result<Light> {
        if !(shininess > 0.0) {
            return Err(GeoError::Domain(format!("shininess must be positive, got {shininess}")));
        }
        self.specular_color = specular_color;
        self.shininess = shininess;
        Ok(self)
    }
}
