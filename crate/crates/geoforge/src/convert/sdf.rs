//! Signed distance grids from watertight meshes: unsigned distance via the
//! BVH closest-point query, sign via ray parity.

use rayon::prelude::*;

use crate::accel::{build_adjacency, is_watertight, TriangleBvh};
use crate::error::{GeoError, Result};
use crate::math::Vec3;
use crate::mesh::TriangleMesh;
use crate::voxel::{GridSpec, SdfGrid};

use super::voxelize::point_inside_by_parity;

/// Sample the mesh's signed distance field at cell centers.
///
/// The grid is the canonical fit of the bounding box expanded by `padding`
/// world units on every side.
pub fn mesh_to_sdfgrid(
    mesh: &TriangleMesh,
    resolution: (usize, usize, usize),
    padding: f64,
) -> Result<SdfGrid> {
    if mesh.num_faces() == 0 {
        return Err(GeoError::Domain("cannot compute an SDF of an empty mesh".into()));
    }
    if padding < 0.0 {
        return Err(GeoError::Domain(format!("padding must be non-negative, got {padding}")));
    }
    let adjacency = build_adjacency(mesh)?;
    if !is_watertight(&adjacency) {
        return Err(GeoError::Precondition(
            "signed distance requires a watertight mesh".into(),
        ));
    }
    let mut bounds = mesh.bounding_box();
    bounds.min -= Vec3::splat(padding);
    bounds.max += Vec3::splat(padding);
    let spec = GridSpec::fit(&bounds, resolution)?;

    let bvh = TriangleBvh::build(mesh)?;
    let (rx, ry, _) = spec.resolution;
    let values: Vec<f64> = (0..spec.num_cells())
        .into_par_iter()
        .map(|i| {
            let x = i % rx;
            let y = (i / rx) % ry;
            let z = i / (rx * ry);
            let center = spec.cell_center(x, y, z);
            let hit = bvh.closest_point(center);
            if point_inside_by_parity(&bvh, center, i as u64) {
                -hit.distance
            } else {
                hit.distance
            }
        })
        .collect();

    SdfGrid::new(spec, values)
}

/// Signed distance of arbitrary query points to a watertight mesh;
/// the BVH must come from the same mesh.
pub fn signed_distances(bvh: &TriangleBvh, points: &[Vec3]) -> Vec<f64> {
    points
        .par_iter()
        .enumerate()
        .map(|(i, &p)| {
            let d = bvh.closest_point(p).distance;
            if point_inside_by_parity(bvh, p, i as u64) {
                -d
            } else {
                d
            }
        })
        .collect()
}
