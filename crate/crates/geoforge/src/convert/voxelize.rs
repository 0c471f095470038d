//! Mesh voxelization: surface overlap marking and solid ray-parity fill.

use rayon::prelude::*;

use crate::accel::{build_adjacency, is_watertight, TriangleBvh};
use crate::error::{GeoError, Result};
use crate::math::Vec3;
use crate::mesh::TriangleMesh;
use crate::rng;
use crate::voxel::{GridSpec, VoxelGrid};

use super::sat::triangle_box_overlap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VoxelizeMode {
    /// Mark cells whose box overlaps a triangle.
    Surface,
    /// Surface cells plus interior fill by ray parity; requires a
    /// watertight mesh.
    Solid,
}

const PARITY_SEED: u64 = 0x9e0f_5eed;
pub(crate) const MAX_PARITY_RETRIES: usize = 8;

/// Voxelize onto the canonical grid fit (bounding box plus half a voxel).
pub fn voxelize_mesh(
    mesh: &TriangleMesh,
    resolution: (usize, usize, usize),
    mode: VoxelizeMode,
) -> Result<VoxelGrid> {
    if mesh.num_faces() == 0 {
        return Err(GeoError::Domain("cannot voxelize an empty mesh".into()));
    }
    let spec = GridSpec::fit(&mesh.bounding_box(), resolution)?;
    voxelize_mesh_on_grid(mesh, spec, mode)
}

/// Voxelize onto an explicit grid; the grid box must contain the mesh.
pub fn voxelize_mesh_on_grid(
    mesh: &TriangleMesh,
    spec: GridSpec,
    mode: VoxelizeMode,
) -> Result<VoxelGrid> {
    if mesh.num_faces() == 0 {
        return Err(GeoError::Domain("cannot voxelize an empty mesh".into()));
    }
    if !spec.grid_box().contains_box(&mesh.bounding_box()) {
        return Err(GeoError::Precondition("mesh does not fit the voxel grid".into()));
    }
    if mode == VoxelizeMode::Solid {
        let adjacency = build_adjacency(mesh)?;
        if !is_watertight(&adjacency) {
            return Err(GeoError::Precondition(
                "solid voxelization requires a watertight mesh".into(),
            ));
        }
    }

    let (rx, ry, rz) = spec.resolution;
    let mut grid = VoxelGrid::zeros(spec);

    // Surface pass: mark every cell whose box a triangle touches.
    let half = Vec3::splat(spec.voxel_size * 0.5);
    for f in 0..mesh.num_faces() {
        let tri = mesh.triangle(f);
        // Widen by one cell so boxes merely touched by the triangle's AABB
        // boundary still get tested.
        let lo = spec.cell_of(tri[0].min(tri[1]).min(tri[2]));
        let hi = spec.cell_of(tri[0].max(tri[1]).max(tri[2]));
        let lo = (lo.0.saturating_sub(1), lo.1.saturating_sub(1), lo.2.saturating_sub(1));
        let hi = (
            (hi.0 + 1).min(rx - 1),
            (hi.1 + 1).min(ry - 1),
            (hi.2 + 1).min(rz - 1),
        );
        for z in lo.2..=hi.2 {
            for y in lo.1..=hi.1 {
                for x in lo.0..=hi.0 {
                    if grid.get(x, y, z) == 0.0
                        && triangle_box_overlap(spec.cell_center(x, y, z), half, &tri)
                    {
                        grid.set(x, y, z, 1.0);
                    }
                }
            }
        }
    }

    if mode == VoxelizeMode::Solid {
        let bvh = TriangleBvh::build(mesh)?;
        let origin_x = spec.origin.x - spec.voxel_size;
        let mut values = grid.values().to_vec();
        // One +x ray per (y, z) cell row; rows are contiguous in the
        // x-fastest layout, so each row fills its own slice.
        values.par_chunks_mut(rx).enumerate().for_each(|(row, cells)| {
            let y = row % ry;
            let z = row / ry;
            let yc = spec.cell_center(0, y, z).y;
            let zc = spec.cell_center(0, y, z).z;
            let origin = Vec3::new(origin_x, yc, zc);
            let crossings = row_crossings(&bvh, origin, row as u64);
            for (x, cell) in cells.iter_mut().enumerate().take(rx) {
                if *cell > 0.0 {
                    continue;
                }
                let xc = spec.cell_center(x, y, z).x;
                let inside = crossings.iter().filter(|&&cx| cx < xc).count() % 2 == 1;
                if inside {
                    *cell = 1.0;
                }
            }
        });
        grid = VoxelGrid::new(spec, values)?;
    }

    Ok(grid)
}

/// x-coordinates at which a +x row ray crosses the surface, retrying with a
/// jittered direction while any hit grazes an edge.
fn row_crossings(bvh: &TriangleBvh, origin: Vec3, row: u64) -> Vec<f64> {
    let mut direction = Vec3::new(1.0, 0.0, 0.0);
    for attempt in 0..=MAX_PARITY_RETRIES {
        let hits = bvh.ray_intersections(origin, direction);
        if hits.iter().all(|h| !h.edge_grazing) || attempt == MAX_PARITY_RETRIES {
            return hits
                .iter()
                .map(|h| origin.x + h.t * direction.x)
                .collect();
        }
        let jy = (rng::uniform(PARITY_SEED, row, 2 * attempt as u64) - 0.5) * 1e-4;
        let jz = (rng::uniform(PARITY_SEED, row, 2 * attempt as u64 + 1) - 0.5) * 1e-4;
        direction = Vec3::new(1.0, jy, jz).normalize();
    }
    unreachable!()
}

/// Parity-based inside test for a single point, with the same jitter-retry
/// policy. Counter `key` seeds the deterministic jitter sequence.
pub(crate) fn point_inside_by_parity(bvh: &TriangleBvh, point: Vec3, key: u64) -> bool {
    let mut direction = Vec3::new(1.0, 0.0, 0.0);
    for attempt in 0..=MAX_PARITY_RETRIES {
        let hits = bvh.ray_intersections(point, direction);
        if hits.iter().all(|h| !h.edge_grazing) || attempt == MAX_PARITY_RETRIES {
            return hits.len() % 2 == 1;
        }
        let a = rng::uniform(PARITY_SEED ^ 0x51de, key, 3 * attempt as u64) - 0.5;
        let b = rng::uniform(PARITY_SEED ^ 0x51de, key, 3 * attempt as u64 + 1) - 0.5;
        let c = rng::uniform(PARITY_SEED ^ 0x51de, key, 3 * attempt as u64 + 2) - 0.5;
        direction = (Vec3::new(1.0, 0.0, 0.0) + Vec3::new(a, b, c) * 0.3).normalize();
    }
    unreachable!()
}
