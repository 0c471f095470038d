//! Pointcloud/voxel conversions.

use crate::error::{GeoError, Result};
use crate::pointcloud::PointCloud;
use crate::voxel::{GridSpec, VoxelGrid};

/// Occupancy grid over the cloud's bounding box: a cell is 1 iff at least
/// one point falls in it (floor of the normalized coordinate, clamped).
pub fn pointcloud_to_voxel(cloud: &PointCloud, resolution: (usize, usize, usize)) -> Result<VoxelGrid> {
    if cloud.is_empty() {
        return Err(GeoError::Domain("cannot voxelize an empty pointcloud".into()));
    }
    let spec = GridSpec::fit(&cloud.bounding_box(), resolution)?;
    let mut grid = VoxelGrid::zeros(spec);
    for &p in cloud.points() {
        let (x, y, z) = spec.cell_of(p);
        grid.set(x, y, z, 1.0);
    }
    Ok(grid)
}

/// Centers of occupied cells, in world coordinates.
pub fn voxel_to_pointcloud(grid: &VoxelGrid, threshold: f64) -> Result<PointCloud> {
    let (rx, ry, rz) = grid.resolution();
    let mut points = Vec::new();
    for z in 0..rz {
        for y in 0..ry {
            for x in 0..rx {
                if grid.occupied(x, y, z, threshold) {
                    points.push(grid.spec().cell_center(x, y, z));
                }
            }
        }
    }
    if points.is_empty() {
        return Err(GeoError::Domain(format!("no cells at or above threshold {threshold}")));
    }
    PointCloud::new(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::Vec3;
    use crate::rng::Rng;

    #[test]
    fn single_point_occupies_one_cell() {
        let cloud = PointCloud::new(vec![Vec3::new(0.3, 0.7, -0.2)]).unwrap();
        let grid = pointcloud_to_voxel(&cloud, (4, 4, 4)).unwrap();
        assert_eq!(grid.count_occupied(0.5), 1);
    }

    #[test]
    fn round_trip_centers_stay_near_points() {
        let mut rng = Rng::new(3);
        let points: Vec<Vec3> = (0..200)
            .map(|_| Vec3::new(rng.range(-1.0, 1.0), rng.range(-1.0, 1.0), rng.range(-1.0, 1.0)))
            .collect();
        let cloud = PointCloud::new(points.clone()).unwrap();
        let grid = pointcloud_to_voxel(&cloud, (8, 8, 8)).unwrap();
        let back = voxel_to_pointcloud(&grid, 0.5).unwrap();
        assert!(back.len() <= cloud.len());
        let bound = 3f64.sqrt() / 2.0 * grid.voxel_size() + 1e-12;
        for c in back.points() {
            let nearest = points
                .iter()
                .map(|p| (*p - *c).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(nearest <= bound, "center {c:?} is {nearest} from the cloud");
        }
    }

    #[test]
    fn empty_inputs_rejected() {
        let empty = PointCloud::new(vec![]).unwrap();
        assert!(pointcloud_to_voxel(&empty, (4, 4, 4)).is_err());
        let cloud = PointCloud::new(vec![Vec3::ZERO, Vec3::ONE]).unwrap();
        let grid = pointcloud_to_voxel(&cloud, (4, 4, 4)).unwrap();
        assert!(voxel_to_pointcloud(&grid, 2.0).is_err());
    }
}
