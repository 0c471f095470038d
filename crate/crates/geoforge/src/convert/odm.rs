//! Orthographic depth maps over voxel grids, and visual-hull carving.

use crate::error::{GeoError, Result};
use crate::voxel::{Axis, Odm, Sign, VoxelGrid};

fn cell_at(grid: &VoxelGrid, coords: [usize; 3]) -> f64 {
    grid.get(coords[0], coords[1], coords[2])
}

/// First-hit depths along `axis` in `direction`: `depth(u, v)` counts cells
/// from the entry face to the first cell at or above `threshold`, or the
/// grid extent when the ray exits unhit.
pub fn voxel_to_odm(grid: &VoxelGrid, axis: Axis, direction: Sign, threshold: f64) -> Odm {
    let res = [grid.resolution().0, grid.resolution().1, grid.resolution().2];
    let w = axis.index();
    let (ua, va) = axis.cross_axes();
    let extent = res[w];
    let mut depths = vec![extent; res[ua] * res[va]];

    for v in 0..res[va] {
        for u in 0..res[ua] {
            let mut coords = [0usize; 3];
            coords[ua] = u;
            coords[va] = v;
            for step in 0..extent {
                coords[w] = match direction {
                    Sign::Positive => step,
                    Sign::Negative => extent - 1 - step,
                };
                if cell_at(grid, coords) >= threshold {
                    depths[u + res[ua] * v] = step;
                    break;
                }
            }
        }
    }
    Odm::new(axis, direction, (res[ua], res[va]), extent, depths)
        .expect("depths bounded by extent by construction")
}

/// Carve a grid against a set of ODMs: a cell is cleared when any ODM ray
/// passes it before that ray's first recorded hit.
pub fn odm_carve(grid: &VoxelGrid, odms: &[Odm]) -> Result<VoxelGrid> {
    let res = [grid.resolution().0, grid.resolution().1, grid.resolution().2];
    for odm in odms {
        let w = odm.axis.index();
        let (ua, va) = odm.axis.cross_axes();
        if odm.extent != res[w] || odm.resolution != (res[ua], res[va]) {
            return Err(GeoError::Domain(format!(
                "ODM resolution {:?}x{} does not match grid {:?}",
                odm.resolution, odm.extent, grid.resolution()
            )));
        }
    }

    let mut values = grid.values().to_vec();
    for odm in odms {
        let w = odm.axis.index();
        let (ua, va) = odm.axis.cross_axes();
        for v in 0..res[va] {
            for u in 0..res[ua] {
                let depth = odm.depth(u, v);
                let mut coords = [0usize; 3];
                coords[ua] = u;
                coords[va] = v;
                for step in 0..depth {
                    coords[w] = match odm.direction {
                        Sign::Positive => step,
                        Sign::Negative => res[w] - 1 - step,
                    };
                    let idx = grid.spec().linear(coords[0], coords[1], coords[2]);
                    values[idx] = 0.0;
                }
            }
        }
    }
    VoxelGrid::new(*grid.spec(), values)
}
