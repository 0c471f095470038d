//! Voxel grid to mesh: emit quads for occupied-cell faces exposed to
//! unoccupied cells or the grid boundary, welding shared corners.

use std::collections::HashMap;

use crate::error::{GeoError, Result};
use crate::math::Vec3;
use crate::mesh::TriangleMesh;
use crate::voxel::VoxelGrid;

/// Cubify a voxel grid at the given occupancy threshold.
pub fn voxel_to_mesh(grid: &VoxelGrid, threshold: f64) -> Result<TriangleMesh> {
    let (rx, ry, rz) = grid.resolution();
    if grid.count_occupied(threshold) == 0 {
        return Err(GeoError::Domain("no occupied cells at this threshold".into()));
    }

    let spec = grid.spec();
    let mut corner_ids: HashMap<(usize, usize, usize), usize> = HashMap::new();
    let mut vertices: Vec<Vec3> = Vec::new();
    let mut faces: Vec<[usize; 3]> = Vec::new();

    let mut corner = |vertices: &mut Vec<Vec3>, gx: usize, gy: usize, gz: usize| -> usize {
        *corner_ids.entry((gx, gy, gz)).or_insert_with(|| {
            vertices.push(
                spec.origin
                    + Vec3::new(
                        gx as f64 * spec.voxel_size,
                        gy as f64 * spec.voxel_size,
                        gz as f64 * spec.voxel_size,
                    ),
            );
            vertices.len() - 1
        })
    };

    // Each entry: (axis, direction, the four cell-corner offsets in CCW
    // order seen from outside).
    #[allow(clippy::type_complexity)]
    let face_specs: [(usize, i64, [[usize; 3]; 4]); 6] = [
        (0, -1, [[0, 0, 0], [0, 0, 1], [0, 1, 1], [0, 1, 0]]), // -x
        (0, 1, [[1, 0, 0], [1, 1, 0], [1, 1, 1], [1, 0, 1]]),  // +x
        (1, -1, [[0, 0, 0], [1, 0, 0], [1, 0, 1], [0, 0, 1]]), // -y
        (1, 1, [[0, 1, 0], [0, 1, 1], [1, 1, 1], [1, 1, 0]]),  // +y
        (2, -1, [[0, 0, 0], [0, 1, 0], [1, 1, 0], [1, 0, 0]]), // -z
        (2, 1, [[0, 0, 1], [1, 0, 1], [1, 1, 1], [0, 1, 1]]),  // +z
    ];

    for z in 0..rz {
        for y in 0..ry {
            for x in 0..rx {
                if !grid.occupied(x, y, z, threshold) {
                    continue;
                }
                let cell = [x as i64, y as i64, z as i64];
                let res = [rx as i64, ry as i64, rz as i64];
                for (axis, dir, corners) in &face_specs {
                    let mut n = cell;
                    n[*axis] += dir;
                    let exposed = n[*axis] < 0
                        || n[*axis] >= res[*axis]
                        || !grid.occupied(n[0] as usize, n[1] as usize, n[2] as usize, threshold);
                    if !exposed {
                        continue;
                    }
                    let ids: Vec<usize> = corners
                        .iter()
                        .map(|c| corner(&mut vertices, x + c[0], y + c[1], z + c[2]))
                        .collect();
                    faces.push([ids[0], ids[1], ids[2]]);
                    faces.push([ids[0], ids[2], ids[3]]);
                }
            }
        }
    }

    TriangleMesh::new(vertices, faces)
}
