//! Conversions across 3D representations: differentiable mesh sampling,
//! voxelization, signed distance grids, marching cubes, cubify, ODM
//! extraction/carving, and pointcloud/voxel round trips.

mod cubify;
mod marching_cubes;
mod odm;
mod points;
mod sample;
mod sat;
mod sdf;
mod voxelize;

pub use cubify::voxel_to_mesh;
pub use marching_cubes::sdfgrid_to_mesh;
pub use odm::{odm_carve, voxel_to_odm};
pub use points::{pointcloud_to_voxel, voxel_to_pointcloud};
pub use sample::{sample_points_on_mesh, sample_points_vjp, SampledPoints};
pub use sat::triangle_box_overlap;
pub use sdf::{mesh_to_sdfgrid, signed_distances};
pub use voxelize::{voxelize_mesh, voxelize_mesh_on_grid, VoxelizeMode};
