//! Spatial acceleration and mesh connectivity: a triangle BVH for
//! closest-point and ray queries, and hash-based adjacency construction.

mod adjacency;
mod bvh;
pub mod triangle;

pub use adjacency::{build_adjacency, is_watertight, MeshAdjacency};
pub use bvh::{ClosestHit, RayHit, TriangleBvh};
pub use triangle::{closest_point_on_triangle, ray_triangle_intersect, TriangleRayHit};
