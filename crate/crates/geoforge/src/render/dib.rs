//! DIB-style rasterization: foreground pixels interpolate the owner
//! triangle's attributes exactly as the hard pass does (analytic gradients
//! through the barycentric weights), while background pixels get a soft
//! alpha that decays exponentially with the screen distance to the nearest
//! triangle.

use rayon::prelude::*;

use crate::image::Image;
use crate::math::Vec3;

use super::hard::{owner_weights, rasterize_hard_core, HardCore};
use super::screen::{
    barycentric_vjp, pixel_center, point_triangle_boundary_sq, segment_distance_sq_vjp,
};
use super::{RasterGrads, RenderOutput, Scene};

/// Distance to the nearest projected triangle boundary over all faces,
/// with the argmin face, segment, and parameter.
fn nearest_face_distance(scene: &Scene, px: usize, py: usize) -> Option<(f64, usize, usize, f64)> {
    let p = pixel_center(px, py);
    let proj = scene.proj;
    let mut best: Option<(f64, usize, usize, f64)> = None;
    for (f, face) in scene.faces.iter().enumerate() {
        if proj.culled[f] {
            continue;
        }
        let (d2, seg, t) = point_triangle_boundary_sq(
            p,
            proj.screen[face[0]],
            proj.screen[face[1]],
            proj.screen[face[2]],
        );
        if best.is_none() || d2 < best.unwrap().0 {
            best = Some((d2, f, seg, t));
        }
    }
    best
}

pub(crate) fn rasterize_dib_scene(
    scene: &Scene,
    alpha_delta: f64,
    width: usize,
    height: usize,
) -> (RenderOutput, HardCore) {
    let core = rasterize_hard_core(scene.proj, scene.faces, width, height);
    let mut color = Image::zeros(width, height, 3);
    let mut alpha = vec![0.0; width * height];

    let rows: Vec<(Vec<f64>, Vec<f64>)> = (0..height)
        .into_par_iter()
        .map(|y| {
            let mut row_color = vec![0.0; width * 3];
            let mut row_alpha = vec![0.0; width];
            for x in 0..width {
                let idx = y * width + x;
                let pixel = if core.face_ids[idx] >= 0 {
                    let f = core.face_ids[idx] as usize;
                    let rho = owner_weights(scene.proj, scene.faces[f], core.bary[idx]);
                    row_alpha[x] = 1.0;
                    scene.eval_color_from_rho(f, rho).color
                } else {
                    if let Some((d2, _, _, _)) = nearest_face_distance(scene, x, y) {
                        row_alpha[x] = (-d2.sqrt() / alpha_delta).exp();
                    }
                    scene.background
                };
                row_color[x * 3] = pixel.x;
                row_color[x * 3 + 1] = pixel.y;
                row_color[x * 3 + 2] = pixel.z;
            }
            (row_color, row_alpha)
        })
        .collect();
    for (y, (row_color, row_alpha)) in rows.into_iter().enumerate() {
        color.data_mut()[y * width * 3..(y + 1) * width * 3].copy_from_slice(&row_color);
        alpha[y * width..(y + 1) * width].copy_from_slice(&row_alpha);
    }

    (
        RenderOutput {
            width,
            height,
            color,
            alpha,
            depth: Some(core.depth.clone()),
            face_ids: Some(core.face_ids.clone()),
        },
        core,
    )
}

/// Backward: foreground color gradients flow to the three owning vertices
/// through the interpolation weights; background alpha gradients flow to
/// the nearest triangle's segment endpoints. The owner assignment is held
/// fixed (the finite-difference filter skips probes that flip it).
pub(crate) fn rasterize_dib_vjp_scene(
    scene: &Scene,
    alpha_delta: f64,
    width: usize,
    height: usize,
    upstream_color: &Image,
    upstream_alpha: &[f64],
    grads: &mut RasterGrads,
) {
    let proj = scene.proj;
    let core = rasterize_hard_core(proj, scene.faces, width, height);
    for py in 0..height {
        for px in 0..width {
            let idx = py * width + px;
            let g_color = upstream_color.pixel3(px, py);
            let g_alpha = upstream_alpha[idx];
            if g_color == Vec3::ZERO && g_alpha == 0.0 {
                continue;
            }
            let p = pixel_center(px, py);

            if core.face_ids[idx] >= 0 {
                // Foreground: alpha is constant 1, only color gradients.
                if g_color == Vec3::ZERO {
                    continue;
                }
                let f = core.face_ids[idx] as usize;
                let face = scene.faces[f];
                let lambda = core.bary[idx];
                let rho = owner_weights(proj, face, lambda);
                let eval = scene.eval_color_from_rho(f, rho);
                let g_rho = scene.eval_color_vjp(f, &eval, g_color, grads);

                let q = [
                    proj.nearness[face[0]],
                    proj.nearness[face[1]],
                    proj.nearness[face[2]],
                ];
                let mut g_lambda = [0.0; 3];
                if proj.pinhole {
                    let qbar = lambda[0] * q[0] + lambda[1] * q[1] + lambda[2] * q[2];
                    let dot: f64 = (0..3).map(|k| g_rho[k] * rho[k]).sum();
                    for k in 0..3 {
                        let g_u = (g_rho[k] - dot) / qbar;
                        g_lambda[k] += g_u * q[k];
                        grads.near[face[k]] += g_u * lambda[k];
                    }
                } else {
                    g_lambda = g_rho;
                }
                let (a, b, c) = (proj.screen[face[0]], proj.screen[face[1]], proj.screen[face[2]]);
                let g_screen = barycentric_vjp(a, b, c, p, g_lambda);
                for k in 0..3 {
                    grads.screen[face[k]] = grads.screen[face[k]] + g_screen[k];
                }
            } else if g_alpha != 0.0 {
                // Background: alpha = exp(-d / alpha_delta).
                let Some((d2, f, seg, t)) = nearest_face_distance(scene, px, py) else {
                    continue;
                };
                let d = d2.sqrt();
                if d < 1e-12 {
                    continue;
                }
                let alpha = (-d / alpha_delta).exp();
                let g_d = -g_alpha * alpha / alpha_delta;
                let g_d2 = g_d / (2.0 * d);
                let face = scene.faces[f];
                let segs = [(0usize, 1usize), (1, 2), (2, 0)];
                let (sa, sb) = segs[seg];
                let (g_pa, g_pb) = segment_distance_sq_vjp(
                    p,
                    proj.screen[face[sa]],
                    proj.screen[face[sb]],
                    t,
                    g_d2,
                );
                grads.screen[face[sa]] = grads.screen[face[sa]] + g_pa;
                grads.screen[face[sb]] = grads.screen[face[sb]] + g_pb;
            }
        }
    }
}

/// Discrete-choice signature: per-pixel owner and, for background pixels,
/// the argmin (face, segment).
pub(crate) fn dib_signature(scene: &Scene, width: usize, height: usize) -> u64 {
    let core = rasterize_hard_core(scene.proj, scene.faces, width, height);
    let mut h = 0xcbf29ce484222325u64;
    let mut mix = |v: u64| {
        h ^= v;
        h = h.wrapping_mul(0x100000001b3);
    };
    for (f, &culled) in scene.proj.culled.iter().enumerate() {
        if culled {
            mix(0x20000 | f as u64);
        }
    }
    for py in 0..height {
        for px in 0..width {
            let idx = py * width + px;
            mix(core.face_ids[idx] as u64);
            if core.face_ids[idx] < 0 {
                if let Some((_, f, seg, _)) = nearest_face_distance(scene, px, py) {
                    mix(f as u64);
                    mix(seg as u64);
                }
            }
        }
    }
    h
}
