//! geoforge: a 3D geometry kernel with differentiable rendering.
//!
//! The crate covers five 3D representations (triangle meshes, pointclouds,
//! occupancy grids, signed-distance grids, depth maps) and the machinery to
//! move between them: rigid transforms and cameras, BVH-accelerated spatial
//! queries, conversions (sampling, voxelization, marching cubes, ODM
//! carving), a modular software rasterizer with analytic gradients, and the
//! usual 3D losses and metrics with vector-Jacobian products throughout.
//!
//! Start with the runnable examples (`cargo run --example render_modes`) or
//! the `geoforge` CLI for file-to-file conversions.

pub mod accel;
pub mod camera;
pub mod convert;
pub mod depth;
pub mod error;
pub mod gradcheck;
pub mod image;
pub mod io;
pub mod math;
pub mod mesh;
pub mod metrics;
pub mod pointcloud;
pub mod render;
pub mod rng;
pub mod shapes;
pub mod transform;
pub mod voxel;

pub use camera::{backproject_depth, project_points, Camera, Intrinsics, ProjectedPoint};
pub use depth::DepthMap;
pub use error::{GeoError, Result};
pub use image::Image;
pub use math::{Aabb, Mat3, Vec2, Vec3};
pub use mesh::TriangleMesh;
pub use pointcloud::PointCloud;
pub use transform::{
    apply_homogeneous, euler_to_rotation, exp_so3, log_so3, quaternion_to_rotation,
    rotation_to_euler, rotation_to_quaternion, transform_points, EulerConvention, RigidTransform,
};
pub use voxel::{Axis, GridSpec, Odm, SdfGrid, Sign, VoxelGrid};
