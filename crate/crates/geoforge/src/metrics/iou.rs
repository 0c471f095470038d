//! Voxel intersection over union.

use crate::error::{GeoError, Result};
use crate::voxel::VoxelGrid;

/// `|A ∩ B| / |A ∪ B|` over cells at or above `threshold`; two empty grids
/// count as identical (IoU 1).
pub fn voxel_iou(a: &VoxelGrid, b: &VoxelGrid, threshold: f64) -> Result<f64> {
    if a.resolution() != b.resolution() {
        return Err(GeoError::Domain(format!(
            "IoU resolution mismatch: {:?} vs {:?}",
            a.resolution(),
            b.resolution()
        )));
    }
    let mut intersection = 0usize;
    let mut union = 0usize;
    for (&va, &vb) in a.values().iter().zip(b.values()) {
        let oa = va >= threshold;
        let ob = vb >= threshold;
        if oa && ob {
            intersection += 1;
        }
        if oa || ob {
            union += 1;
        }
    }
    if union == 0 {
        Ok(1.0)
    } else {
        Ok(intersection as f64 / union as f64)
    }
}
