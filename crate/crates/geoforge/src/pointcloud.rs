//! Unordered 3D point sets with optional per-point attributes.

use crate::error::{GeoError, Result};
use crate::math::{Aabb, Vec3};

#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: Vec<Vec3>,
    normals: Option<Vec<Vec3>>,
    colors: Option<Vec<Vec3>>,
}

impl PointCloud {
    pub fn new(points: Vec<Vec3>) -> Result<PointCloud> {
        for (i, p) in points.iter().enumerate() {
            if !p.is_finite() {
                return Err(GeoError::Domain(format!("point {i} is not finite: {p:?}")));
            }
        }
        Ok(PointCloud {
            points,
            normals: None,
            colors: None,
        })
    }

    pub fn with_normals(mut self, normals: Vec<Vec3>) -> Result<PointCloud> {
        if normals.len() != self.points.len() {
            return Err(GeoError::Domain(format!(
                "{} normals for {} points",
                normals.len(),
                self.points.len()
            )));
        }
        self.normals = Some(normals);
        Ok(self)
    }

    pub fn with_colors(mut self, colors: Vec<Vec3>) -> Result<PointCloud> {
        if colors.len() != self.points.len() {
            return Err(GeoError::Domain(format!(
                "{} colors for {} points",
                colors.len(),
                self.points.len()
            )));
        }
        self.colors = Some(colors);
        Ok(self)
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn normals(&self) -> Option<&[Vec3]> {
        self.normals.as_deref()
    }

    pub fn colors(&self) -> Option<&[Vec3]> {
        self.colors.as_deref()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn bounding_box(&self) -> Aabb {
        Aabb::from_points(self.points.iter().copied())
    }
}
