//! Hard z-buffer rasterization: each pixel is owned by the nearest covering
//! triangle under the top-left fill rule. The reference, non-differentiable
//! mode; also the foreground pass of the DIB rasterizer.

use rayon::prelude::*;

use crate::depth::DepthMap;

use super::screen::{attribute_weights, covers, ProjectedMesh};

/// Ownership and interpolation data per pixel, before any shading.
#[derive(Debug, Clone)]
pub(crate) struct HardCore {
    /// Owning face per pixel, -1 for background.
    pub face_ids: Vec<i64>,
    /// Raw screen barycentric coordinates of the owner.
    pub bary: Vec<[f64; 3]>,
    /// Interpolated camera depth; `DepthMap::NO_HIT` for background.
    pub depth: Vec<f64>,
}

/// Scan all faces row-binned; within a row faces are visited in index
/// order, so ties (equal depth) resolve to the lowest face index and the
/// result is independent of the parallel schedule.
pub(crate) fn rasterize_hard_core(
    proj: &ProjectedMesh,
    faces: &[[usize; 3]],
    width: usize,
    height: usize,
) -> HardCore {
    // Bin faces by the pixel rows their screen bbox touches.
    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); height];
    for (f, face) in faces.iter().enumerate() {
        if proj.culled[f] {
            continue;
        }
        let (a, b, c) = (proj.screen[face[0]], proj.screen[face[1]], proj.screen[face[2]]);
        let y_min = a.y.min(b.y).min(c.y);
        let y_max = a.y.max(b.y).max(c.y);
        // Pixel center y = row + 0.5 lies in [y_min, y_max].
        let lo = ((y_min - 0.5).ceil().max(0.0)) as usize;
        let hi = ((y_max - 0.5).floor()).min(height as f64 - 1.0);
        if hi < 0.0 {
            continue;
        }
        for row in rows.iter_mut().take(hi as usize + 1).skip(lo) {
            row.push(f);
        }
    }

    let mut face_ids = vec![-1i64; width * height];
    let mut bary = vec![[0.0; 3]; width * height];
    let mut depth = vec![DepthMap::NO_HIT; width * height];

    face_ids
        .par_chunks_mut(width)
        .zip(bary.par_chunks_mut(width))
        .zip(depth.par_chunks_mut(width))
        .enumerate()
        .for_each(|(y, ((ids_row, bary_row), depth_row))| {
            for &f in &rows[y] {
                let face = faces[f];
                let (a, b, c) = (proj.screen[face[0]], proj.screen[face[1]], proj.screen[face[2]]);
                let x_min = a.x.min(b.x).min(c.x);
                let x_max = a.x.max(b.x).max(c.x);
                let x_lo = ((x_min - 0.5).ceil().max(0.0)) as usize;
                let x_hi = ((x_max - 0.5).floor()).min(width as f64 - 1.0);
                if x_hi < 0.0 {
                    continue;
                }
                for x in x_lo..=x_hi as usize {
                    let p = super::screen::pixel_center(x, y);
                    let Some(lambda) = covers(a, b, c, p) else {
                        continue;
                    };
                    let z = interpolate_depth(proj, face, lambda);
                    if z < depth_row[x] {
                        depth_row[x] = z;
                        ids_row[x] = f as i64;
                        bary_row[x] = lambda;
                    }
                }
            }
        });

    HardCore {
        face_ids,
        bary,
        depth,
    }
}

/// Perspective-correct depth at a pixel: interpolate nearness linearly in
/// screen space and invert for pinhole cameras.
#[inline]
pub(crate) fn interpolate_depth(proj: &ProjectedMesh, face: [usize; 3], lambda: [f64; 3]) -> f64 {
    if proj.pinhole {
        let inv_z = lambda[0] * proj.nearness[face[0]]
            + lambda[1] * proj.nearness[face[1]]
            + lambda[2] * proj.nearness[face[2]];
        1.0 / inv_z
    } else {
        lambda[0] * proj.depth[face[0]]
            + lambda[1] * proj.depth[face[1]]
            + lambda[2] * proj.depth[face[2]]
    }
}

/// Attribute weights of the owner at a pixel (perspective-corrected).
#[inline]
pub(crate) fn owner_weights(proj: &ProjectedMesh, face: [usize; 3], lambda: [f64; 3]) -> [f64; 3] {
    let q = [
        proj.nearness[face[0]],
        proj.nearness[face[1]],
        proj.nearness[face[2]],
    ];
    attribute_weights(lambda, q, proj.pinhole)
}
