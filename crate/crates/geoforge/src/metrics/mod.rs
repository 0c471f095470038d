//! Losses and evaluation metrics for the five representations, with
//! analytic VJPs for the differentiable ones.

mod chamfer;
mod emd;
mod iou;
mod p2s;
mod regularizers;

pub use chamfer::{chamfer_distance, chamfer_distance_vjp, nearest_neighbors, ChamferResult};
pub use emd::{emd_approx, MatchingResult};
pub use iou::voxel_iou;
pub use p2s::{point_to_surface, point_to_surface_vjp, PointToSurfaceResult};
pub use regularizers::{
    edge_length_loss, edge_length_loss_vjp, laplacian_loss, laplacian_loss_vjp, smoothness_loss,
    smoothness_loss_vjp,
};
