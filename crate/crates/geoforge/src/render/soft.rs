//! Soft rasterization: every face contributes to every pixel through a
//! sigmoid of its signed squared screen distance, and contributions are
//! aggregated with a depth softmax. Fully differentiable; the backward pass
//! chains analytically through the sigmoid, the aggregation weights, the
//! clamped barycentric extension, projection, and the rigid transform.

use rayon::prelude::*;

use crate::image::Image;
use crate::math::{Vec2, Vec3};

use super::screen::{
    barycentric, barycentric_vjp, pixel_center, point_triangle_boundary_sq,
    segment_distance_sq_vjp,
};
use super::{RasterGrads, RenderOutput, Scene, SoftSettings};

/// Contributions with `delta * d^2 / sigma` below this are dropped; the
/// sigmoid there is below 1e-26, far under every stated tolerance.
const SCORE_CUTOFF: f64 = -60.0;

/// Stable logistic function.
#[inline]
fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Everything one face contributes to one pixel.
struct Contribution {
    face: usize,
    lambda: [f64; 3],
    lambda_n: [f64; 3],
    clamp_mask: u8,
    sum_clamped: f64,
    qbar: f64,
    zbar: f64,
    seg: usize,
    seg_t: f64,
    delta: f64,
    d_big: f64,
    exp_shifted: f64,
    weight_raw: f64,
    color: super::ColorEval,
}

struct PixelEval {
    contributions: Vec<Contribution>,
    total: f64,
    bg_raw: f64,
    color: Vec3,
    silhouette: f64,
}

fn eval_pixel(scene: &Scene, settings: &SoftSettings, px: usize, py: usize) -> PixelEval {
    let p = pixel_center(px, py);
    let proj = scene.proj;
    let range = proj.near_hi - proj.near_lo;
    let mut contributions: Vec<Contribution> = Vec::new();

    for (f, face) in scene.faces.iter().enumerate() {
        if proj.culled[f] {
            continue;
        }
        let (a, b, c) = (proj.screen[face[0]], proj.screen[face[1]], proj.screen[face[2]]);
        let (d2, seg, seg_t) = point_triangle_boundary_sq(p, a, b, c);
        let (lambda, _) = barycentric(a, b, c, p);
        let inside = lambda[0] >= 0.0 && lambda[1] >= 0.0 && lambda[2] >= 0.0;
        let delta = if inside { 1.0 } else { -1.0 };
        let score = delta * d2 / settings.sigma;
        if score < SCORE_CUTOFF {
            continue;
        }
        let d_big = sigmoid(score);

        // Clamped barycentric extension for depth and attributes.
        let mut lambda_c = [0.0; 3];
        let mut clamp_mask = 0u8;
        for i in 0..3 {
            lambda_c[i] = lambda[i].clamp(0.0, 1.0);
            if lambda[i] < 0.0 {
                clamp_mask |= 1 << (2 * i);
            }
            if lambda[i] > 1.0 {
                clamp_mask |= 1 << (2 * i + 1);
            }
        }
        let sum_clamped = lambda_c[0] + lambda_c[1] + lambda_c[2];
        let lambda_n = [
            lambda_c[0] / sum_clamped,
            lambda_c[1] / sum_clamped,
            lambda_c[2] / sum_clamped,
        ];
        let q = [
            proj.nearness[face[0]],
            proj.nearness[face[1]],
            proj.nearness[face[2]],
        ];
        let qbar = lambda_n[0] * q[0] + lambda_n[1] * q[1] + lambda_n[2] * q[2];
        let zbar = if range > 1e-12 {
            (qbar - proj.near_lo) / range
        } else {
            1.0
        };
        let color = scene.eval_color(f, lambda_n);

        contributions.push(Contribution {
            face: f,
            lambda,
            lambda_n,
            clamp_mask,
            sum_clamped,
            qbar,
            zbar,
            seg,
            seg_t,
            delta,
            d_big,
            exp_shifted: 0.0,
            weight_raw: 0.0,
            color,
        });
    }

    // Shift the depth softmax by its maximum exponent; the weights are
    // invariant to the shift, so it never enters the gradients.
    let mut shift = settings.background_eps;
    for contribution in &contributions {
        shift = shift.max(contribution.zbar);
    }
    let bg_raw = ((settings.background_eps - shift) / settings.gamma).exp();
    let mut total = bg_raw;
    let mut silhouette_inv = 1.0;
    for contribution in &mut contributions {
        contribution.exp_shifted = ((contribution.zbar - shift) / settings.gamma).exp();
        contribution.weight_raw = contribution.d_big * contribution.exp_shifted;
        total += contribution.weight_raw;
        silhouette_inv *= 1.0 - contribution.d_big;
    }
    let mut color = scene.background * (bg_raw / total);
    for contribution in &contributions {
        color += contribution.color.color * (contribution.weight_raw / total);
    }

    PixelEval {
        contributions,
        total,
        bg_raw,
        color,
        silhouette: 1.0 - silhouette_inv,
    }
}

/// Forward soft rasterization.
pub(crate) fn rasterize_soft_scene(
    scene: &Scene,
    settings: &SoftSettings,
    width: usize,
    height: usize,
) -> RenderOutput {
    let mut color = Image::zeros(width, height, 3);
    let mut alpha = vec![0.0; width * height];

    let rows: Vec<(Vec<f64>, Vec<f64>)> = (0..height)
        .into_par_iter()
        .map(|y| {
            let mut row_color = vec![0.0; width * 3];
            let mut row_alpha = vec![0.0; width];
            for x in 0..width {
                let eval = eval_pixel(scene, settings, x, y);
                row_color[x * 3] = eval.color.x;
                row_color[x * 3 + 1] = eval.color.y;
                row_color[x * 3 + 2] = eval.color.z;
                row_alpha[x] = eval.silhouette;
            }
            (row_color, row_alpha)
        })
        .collect();
    for (y, (row_color, row_alpha)) in rows.into_iter().enumerate() {
        color.data_mut()[y * width * 3..(y + 1) * width * 3].copy_from_slice(&row_color);
        alpha[y * width..(y + 1) * width].copy_from_slice(&row_alpha);
    }

    RenderOutput {
        width,
        height,
        color,
        alpha,
        depth: None,
        face_ids: None,
    }
}

/// Backward pass: pull cotangents on color and alpha back to screen
/// positions, nearness, camera positions (flat-normal chain) and vertex
/// colors. Sequential over pixels for a schedule-free accumulation order.
pub(crate) fn rasterize_soft_vjp_scene(
    scene: &Scene,
    settings: &SoftSettings,
    width: usize,
    height: usize,
    upstream_color: &Image,
    upstream_alpha: &[f64],
    grads: &mut RasterGrads,
) {
    let proj = scene.proj;
    let range = proj.near_hi - proj.near_lo;
    for py in 0..height {
        for px in 0..width {
            let g_color = upstream_color.pixel3(px, py);
            let g_alpha = upstream_alpha[py * width + px];
            if g_color == Vec3::ZERO && g_alpha == 0.0 {
                continue;
            }
            let eval = eval_pixel(scene, settings, px, py);
            let n = eval.contributions.len();

            // Prefix/suffix products of (1 - D) for the silhouette chain.
            let mut prefix = vec![1.0; n + 1];
            for (i, contribution) in eval.contributions.iter().enumerate() {
                prefix[i + 1] = prefix[i] * (1.0 - contribution.d_big);
            }
            let mut suffix = vec![1.0; n + 1];
            for i in (0..n).rev() {
                suffix[i] = suffix[i + 1] * (1.0 - eval.contributions[i].d_big);
            }

            let p = pixel_center(px, py);
            for (i, contribution) in eval.contributions.iter().enumerate() {
                let face = scene.faces[contribution.face];
                let (a, b, c) = (
                    proj.screen[face[0]],
                    proj.screen[face[1]],
                    proj.screen[face[2]],
                );

                // Aggregation chain: d color / d a_j = (c_j - C) / total.
                let g_a = g_color.dot(contribution.color.color - eval.color) / eval.total;
                let g_c = g_color * (contribution.weight_raw / eval.total);
                let mut g_d = g_a * contribution.exp_shifted;
                let mut g_zbar = g_a * contribution.weight_raw / settings.gamma;

                // Silhouette chain: dS/dD_j = prod_{k != j} (1 - D_k).
                g_d += g_alpha * prefix[i] * suffix[i + 1];

                // Sigmoid chain to the squared boundary distance.
                let g_score = g_d * contribution.d_big * (1.0 - contribution.d_big);
                let g_d2 = g_score * contribution.delta / settings.sigma;
                let segs = [(0usize, 1usize), (1, 2), (2, 0)];
                let (sa, sb) = segs[contribution.seg];
                let (g_pa, g_pb) = segment_distance_sq_vjp(
                    p,
                    proj.screen[face[sa]],
                    proj.screen[face[sb]],
                    contribution.seg_t,
                    g_d2,
                );
                grads.screen[face[sa]] = grads.screen[face[sa]] + g_pa;
                grads.screen[face[sb]] = grads.screen[face[sb]] + g_pb;

                // Color chain through shading, attributes and weights.
                let g_rho = scene.eval_color_vjp(contribution.face, &contribution.color, g_c, grads);

                // zbar normalization: zbar = (qbar - lo) / (hi - lo).
                let mut g_qbar = 0.0;
                if range > 1e-12 {
                    g_qbar += g_zbar / range;
                    grads.near[proj.near_lo_vertex] +=
                        g_zbar * (contribution.qbar - proj.near_hi) / (range * range);
                    grads.near[proj.near_hi_vertex] +=
                        g_zbar * (proj.near_lo - contribution.qbar) / (range * range);
                }
                g_zbar = 0.0;
                let _ = g_zbar;

                // Attribute weights rho and depth qbar both consume
                // lambda_n and the vertex nearness.
                let q = [
                    proj.nearness[face[0]],
                    proj.nearness[face[1]],
                    proj.nearness[face[2]],
                ];
                let mut g_lambda_n = [0.0; 3];
                if proj.pinhole {
                    // rho_i = lambda_n_i q_i / qbar.
                    let rho = contribution.color.rho;
                    let dot: f64 = (0..3).map(|k| g_rho[k] * rho[k]).sum();
                    for k in 0..3 {
                        let g_u = (g_rho[k] - dot) / contribution.qbar;
                        g_lambda_n[k] += g_u * q[k];
                        grads.near[face[k]] += g_u * contribution.lambda_n[k];
                    }
                } else {
                    g_lambda_n = g_rho;
                }
                for k in 0..3 {
                    g_lambda_n[k] += g_qbar * q[k];
                    grads.near[face[k]] += g_qbar * contribution.lambda_n[k];
                }

                // lambda_n = lambda_c / sum; clamp gates the raw lambda.
                let dot: f64 = (0..3)
                    .map(|k| g_lambda_n[k] * contribution.lambda_n[k])
                    .sum();
                let mut g_lambda = [0.0; 3];
                for k in 0..3 {
                    let g_lc = (g_lambda_n[k] - dot) / contribution.sum_clamped;
                    let clamped = contribution.clamp_mask & (0b11 << (2 * k)) != 0;
                    if !clamped {
                        g_lambda[k] = g_lc;
                    }
                }
                let g_screen = barycentric_vjp(a, b, c, p, g_lambda);
                for k in 0..3 {
                    grads.screen[face[k]] = grads.screen[face[k]] + g_screen[k];
                }
                let _ = contribution.lambda;
            }

            // Background weight has no free parameters; its gradient path
            // ends at the fixed eps.
            let _ = eval.bg_raw;
        }
    }
}

/// Discrete-choice signature for the finite-difference filter: contributing
/// face sets, nearest boundary segments, clamp masks, and the scene depth
/// extremes. A probe whose signature changes crossed a discontinuity.
pub(crate) fn soft_signature(
    scene: &Scene,
    settings: &SoftSettings,
    width: usize,
    height: usize,
) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    let mut mix = |v: u64| {
        h ^= v;
        h = h.wrapping_mul(0x100000001b3);
    };
    mix(scene.proj.near_lo_vertex as u64);
    mix(scene.proj.near_hi_vertex as u64);
    for (f, &culled) in scene.proj.culled.iter().enumerate() {
        if culled {
            mix(0x10000 | f as u64);
        }
    }
    for py in 0..height {
        for px in 0..width {
            let eval = eval_pixel(scene, settings, px, py);
            mix(0xffff_ffff);
            for contribution in &eval.contributions {
                mix(contribution.face as u64);
                mix(contribution.seg as u64);
                mix(contribution.clamp_mask as u64);
                mix(if contribution.delta > 0.0 { 1 } else { 0 });
            }
        }
    }
    let _ = Vec2::ZERO;
    h
}
