//! Point-to-surface loss: mean squared distance from points to a mesh.

use rayon::prelude::*;

use crate::accel::TriangleBvh;
use crate::error::{GeoError, Result};
use crate::math::Vec3;

/// Loss value plus the closest surface points it was computed from.
#[derive(Debug, Clone)]
pub struct PointToSurfaceResult {
    pub value: f64,
    pub closest: Vec<Vec3>,
    pub faces: Vec<usize>,
}

/// Mean over points of the squared distance to the nearest triangle.
pub fn point_to_surface(points: &[Vec3], bvh: &TriangleBvh) -> Result<PointToSurfaceResult> {
    if points.is_empty() {
        return Err(GeoError::Domain("point-to-surface of an empty point set".into()));
    }
    let hits: Vec<_> = points.par_iter().map(|&p| bvh.closest_point(p)).collect();
    let value = hits
        .iter()
        .zip(points)
        .map(|(h, &p)| (p - h.point).norm_squared())
        .sum::<f64>()
        / points.len() as f64;
    Ok(PointToSurfaceResult {
        value,
        closest: hits.iter().map(|h| h.point).collect(),
        faces: hits.iter().map(|h| h.face).collect(),
    })
}

/// Gradient with respect to the query points, closest points held fixed:
/// `2 (p - closest) / P` per point.
pub fn point_to_surface_vjp(
    points: &[Vec3],
    result: &PointToSurfaceResult,
    upstream: f64,
) -> Vec<Vec3> {
    let scale = 2.0 * upstream / points.len() as f64;
    points
        .iter()
        .zip(&result.closest)
        .map(|(&p, &c)| (p - c) * scale)
        .collect()
}
