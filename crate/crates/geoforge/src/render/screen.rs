//! Screen-space primitives shared by the rasterizers: mesh projection,
//! edge functions, barycentric coordinates with analytic partials, coverage
//! with the top-left fill rule, and point-segment distances.

use crate::camera::{Camera, Intrinsics};
use crate::math::{Vec2, Vec3};
use crate::mesh::TriangleMesh;

/// Near plane for rasterization under a pinhole camera; faces with any
/// vertex at or behind it are culled, not clipped.
pub const RENDER_NEAR: f64 = 1e-4;

/// Projected screen triangles below this absolute area are skipped.
pub const DEGENERATE_AREA2: f64 = 1e-12;

/// A mesh pushed through camera extrinsics and projection.
#[derive(Debug, Clone)]
pub struct ProjectedMesh {
    /// Camera-space vertex positions.
    pub cam: Vec<Vec3>,
    /// Continuous pixel coordinates per vertex.
    pub screen: Vec<Vec2>,
    /// Camera-space depth per vertex.
    pub depth: Vec<f64>,
    /// Nearness: `1/z` under a pinhole, `-z` under orthographic. Larger is
    /// closer to the camera either way.
    pub nearness: Vec<f64>,
    /// Per-face cull flag (behind the near plane or degenerate on screen).
    pub culled: Vec<bool>,
    /// Nearness range over the vertices of non-culled faces.
    pub near_lo: f64,
    pub near_hi: f64,
    /// Vertex indices attaining `near_lo` / `near_hi`.
    pub near_lo_vertex: usize,
    pub near_hi_vertex: usize,
    pub pinhole: bool,
}

/// Transform and project every vertex; cull faces per the near-plane and
/// degeneracy rules. Exposed so tests can verify the rasterizer stages all
/// consume the identical projected vertex set.
pub fn project_mesh(camera: &Camera, mesh: &TriangleMesh) -> ProjectedMesh {
    let pinhole = camera.is_pinhole();
    let n = mesh.num_vertices();
    let mut cam = Vec::with_capacity(n);
    let mut screen = Vec::with_capacity(n);
    let mut depth = Vec::with_capacity(n);
    let mut nearness = Vec::with_capacity(n);
    for &p in mesh.vertices() {
        let c = camera.to_camera(p);
        cam.push(c);
        depth.push(c.z);
        nearness.push(if pinhole { 1.0 / c.z } else { -c.z });
        let (u, v) = match *camera.intrinsics() {
            Intrinsics::Pinhole { fx, fy, cx, cy } => {
                if c.z > RENDER_NEAR {
                    (fx * c.x / c.z + cx, fy * c.y / c.z + cy)
                } else {
                    (f64::NAN, f64::NAN)
                }
            }
            Intrinsics::Orthographic {
                scale_x,
                scale_y,
                cx,
                cy,
            } => (c.x / scale_x + cx, c.y / scale_y + cy),
        };
        screen.push(Vec2::new(u, v));
    }

    let mut culled = Vec::with_capacity(mesh.num_faces());
    for f in 0..mesh.num_faces() {
        let [a, b, c] = mesh.faces()[f];
        let behind = pinhole
            && (depth[a] <= RENDER_NEAR || depth[b] <= RENDER_NEAR || depth[c] <= RENDER_NEAR);
        let cull = behind || {
            let t = edge_function(screen[a], screen[b], screen[c]);
            !t.is_finite() || t.abs() < DEGENERATE_AREA2
        };
        culled.push(cull);
    }

    // Nearness range over vertices of visible faces, for depth
    // normalization in the aggregating rasterizers.
    let mut near_lo = f64::INFINITY;
    let mut near_hi = f64::NEG_INFINITY;
    let mut near_lo_vertex = 0;
    let mut near_hi_vertex = 0;
    for (f, face) in mesh.faces().iter().enumerate() {
        if culled[f] {
            continue;
        }
        for &v in face {
            if nearness[v] < near_lo {
                near_lo = nearness[v];
                near_lo_vertex = v;
            }
            if nearness[v] > near_hi {
                near_hi = nearness[v];
                near_hi_vertex = v;
            }
        }
    }

    ProjectedMesh {
        cam,
        screen,
        depth,
        nearness,
        culled,
        near_lo,
        near_hi,
        near_lo_vertex,
        near_hi_vertex,
        pinhole,
    }
}

/// Continuous coordinates of a pixel's center: integer index plus a half.
#[inline]
pub fn pixel_center(x: usize, y: usize) -> Vec2 {
    Vec2::new(x as f64 + 0.5, y as f64 + 0.5)
}

/// `E(p, q, x)`: twice the signed area of (p, q, x). Positive when x lies
/// left of p->q in a y-down frame traversed clockwise on screen.
#[inline]
pub fn edge_function(p: Vec2, q: Vec2, x: Vec2) -> f64 {
    (q.x - p.x) * (x.y - p.y) - (q.y - p.y) * (x.x - p.x)
}

/// Partials of `edge_function` with respect to `p` and `q` (x held fixed).
#[inline]
pub fn edge_function_partials(p: Vec2, q: Vec2, x: Vec2) -> (Vec2, Vec2) {
    let d_p = Vec2::new(q.y - x.y, x.x - q.x);
    let d_q = Vec2::new(x.y - p.y, p.x - x.x);
    (d_p, d_q)
}

/// Raw screen barycentric coordinates of `x` (may lie outside the simplex)
/// plus twice the signed triangle area.
#[inline]
pub fn barycentric(a: Vec2, b: Vec2, c: Vec2, x: Vec2) -> ([f64; 3], f64) {
    let area2 = edge_function(a, b, c);
    let e0 = edge_function(b, c, x);
    let e1 = edge_function(c, a, x);
    let e2 = edge_function(a, b, x);
    ([e0 / area2, e1 / area2, e2 / area2], area2)
}

/// Pull cotangents on the barycentric coordinates back onto the three
/// screen vertices.
pub fn barycentric_vjp(a: Vec2, b: Vec2, c: Vec2, x: Vec2, g_lambda: [f64; 3]) -> [Vec2; 3] {
    let area2 = edge_function(a, b, c);
    let e = [
        edge_function(b, c, x),
        edge_function(c, a, x),
        edge_function(a, b, x),
    ];
    // lambda_i = e_i / T: g_e_i = g_i / T; g_T = -sum_i g_i e_i / T^2.
    let g_e = [g_lambda[0] / area2, g_lambda[1] / area2, g_lambda[2] / area2];
    let g_t = -(g_lambda[0] * e[0] + g_lambda[1] * e[1] + g_lambda[2] * e[2]) / (area2 * area2);

    let mut grads = [Vec2::ZERO; 3];
    // e0 = E(b, c, x): roles p = b, q = c.
    let (d_p, d_q) = edge_function_partials(b, c, x);
    grads[1] = grads[1] + d_p * g_e[0];
    grads[2] = grads[2] + d_q * g_e[0];
    // e1 = E(c, a, x).
    let (d_p, d_q) = edge_function_partials(c, a, x);
    grads[2] = grads[2] + d_p * g_e[1];
    grads[0] = grads[0] + d_q * g_e[1];
    // e2 = E(a, b, x).
    let (d_p, d_q) = edge_function_partials(a, b, x);
    grads[0] = grads[0] + d_p * g_e[2];
    grads[1] = grads[1] + d_q * g_e[2];
    // T = E(a, b, c): roles p = a, q = b, x = c.
    let (d_p, d_q) = edge_function_partials(a, b, c);
    let d_x = Vec2::new(a.y - b.y, b.x - a.x);
    grads[0] = grads[0] + d_p * g_t;
    grads[1] = grads[1] + d_q * g_t;
    grads[2] = grads[2] + d_x * g_t;
    grads
}

/// Pixel-coverage test with the top-left fill rule. Returns raw barycentric
/// coordinates when the pixel center is covered.
pub fn covers(a: Vec2, b: Vec2, c: Vec2, x: Vec2) -> Option<[f64; 3]> {
    let area2 = edge_function(a, b, c);
    if area2 == 0.0 || !area2.is_finite() {
        return None;
    }
    let s = if area2 > 0.0 { 1.0 } else { -1.0 };
    // Edge k is opposite vertex k; endpoints in original order.
    let edges = [(b, c), (c, a), (a, b)];
    let mut e = [0.0; 3];
    for (k, &(p, q)) in edges.iter().enumerate() {
        let v = edge_function(p, q, x) * s;
        if v < 0.0 {
            return None;
        }
        if v == 0.0 {
            // Oriented direction of the edge after the winding flip.
            let d = (q - p) * s;
            let top = d.y == 0.0 && d.x > 0.0;
            let left = d.y < 0.0;
            if !(top || left) {
                return None;
            }
        }
        e[k] = v;
    }
    let t = area2 * s;
    Some([e[0] / t, e[1] / t, e[2] / t])
}

/// Squared distance from `x` to segment `(a, b)` and the clamped parameter.
#[inline]
pub fn point_segment_distance_sq(x: Vec2, a: Vec2, b: Vec2) -> (f64, f64) {
    let ab = b - a;
    let len2 = ab.norm_squared();
    let t = if len2 > 0.0 {
        (ab.dot(x - a) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let q = a + ab * t;
    ((x - q).norm_squared(), t)
}

/// Squared distance from a pixel to the triangle boundary, with the index
/// of the nearest segment (0: ab, 1: bc, 2: ca) and its parameter.
pub fn point_triangle_boundary_sq(x: Vec2, a: Vec2, b: Vec2, c: Vec2) -> (f64, usize, f64) {
    let segs = [(a, b), (b, c), (c, a)];
    let mut best = (f64::INFINITY, 0usize, 0.0f64);
    for (k, &(p, q)) in segs.iter().enumerate() {
        let (d2, t) = point_segment_distance_sq(x, p, q);
        if d2 < best.0 {
            best = (d2, k, t);
        }
    }
    best
}

/// Gradient of the squared point-segment distance with respect to the two
/// endpoints, parameter held fixed (exact by the envelope argument).
#[inline]
pub fn segment_distance_sq_vjp(x: Vec2, a: Vec2, b: Vec2, t: f64, g: f64) -> (Vec2, Vec2) {
    let q = a + (b - a) * t;
    let r = x - q;
    // d/da |x - a - t(b-a)|^2 = -2 r (1 - t); d/db = -2 r t.
    (r * (-2.0 * (1.0 - t) * g), r * (-2.0 * t * g))
}

/// Perspective-corrected attribute weights from raw or clamped barycentric
/// coordinates `lambda` and per-vertex nearness. For orthographic cameras
/// the weights are `lambda` itself.
#[inline]
pub fn attribute_weights(lambda: [f64; 3], q: [f64; 3], pinhole: bool) -> [f64; 3] {
    if !pinhole {
        return lambda;
    }
    let u = [lambda[0] * q[0], lambda[1] * q[1], lambda[2] * q[2]];
    let s = u[0] + u[1] + u[2];
    [u[0] / s, u[1] / s, u[2] / s]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    #[test]
    fn barycentric_reconstructs_point() {
        let (a, b, c) = (Vec2::new(1.0, 2.0), Vec2::new(5.0, 2.5), Vec2::new(2.0, 6.0));
        let x = Vec2::new(3.0, 3.0);
        let (l, _) = barycentric(a, b, c, x);
        assert!((l[0] + l[1] + l[2] - 1.0).abs() < 1e-12);
        let r = a * l[0] + b * l[1] + c * l[2];
        assert!((r - x).norm() < 1e-12);
    }

    #[test]
    fn barycentric_vjp_matches_finite_differences() {
        let mut rng = Rng::new(77);
        for _ in 0..50 {
            let mut pts = [Vec2::ZERO; 3];
            for p in &mut pts {
                *p = Vec2::new(rng.range(-3.0, 3.0), rng.range(-3.0, 3.0));
            }
            let [a, b, c] = pts;
            let area2 = edge_function(a, b, c).abs();
            if area2 < 0.3 {
                continue;
            }
            let x = Vec2::new(rng.range(-2.0, 2.0), rng.range(-2.0, 2.0));
            let g = [rng.range(-1.0, 1.0), rng.range(-1.0, 1.0), rng.range(-1.0, 1.0)];
            let grads = barycentric_vjp(a, b, c, x, g);

            let eps = 1e-6;
            for v in 0..3 {
                for axis in 0..2 {
                    let mut plus = pts;
                    let mut minus = pts;
                    if axis == 0 {
                        plus[v].x += eps;
                        minus[v].x -= eps;
                    } else {
                        plus[v].y += eps;
                        minus[v].y -= eps;
                    }
                    let (lp, _) = barycentric(plus[0], plus[1], plus[2], x);
                    let (lm, _) = barycentric(minus[0], minus[1], minus[2], x);
                    let fd: f64 = (0..3).map(|i| g[i] * (lp[i] - lm[i]) / (2.0 * eps)).sum();
                    let an = if axis == 0 { grads[v].x } else { grads[v].y };
                    assert!(
                        (fd - an).abs() < 1e-6 * fd.abs().max(an.abs()).max(1.0),
                        "vertex {v} axis {axis}: fd {fd} vs analytic {an}"
                    );
                }
            }
        }
    }

    #[test]
    fn coverage_assigns_shared_edge_to_one_triangle() {
        // Two triangles sharing the vertical edge x = 2; pixel centers on
        // the edge must be covered exactly once regardless of winding.
        let a = Vec2::new(0.0, 0.0);
        let b = Vec2::new(2.0, 0.0);
        let c = Vec2::new(2.0, 4.0);
        let d = Vec2::new(4.0, 0.0);
        let x = Vec2::new(2.0, 1.5);
        let left = covers(a, b, c, x).is_some();
        let right = covers(b, d, c, x).is_some();
        assert!(left ^ right, "left {left} right {right}");
        // Winding flips must not change the outcome.
        let left2 = covers(c, b, a, x).is_some();
        let right2 = covers(c, d, b, x).is_some();
        assert_eq!(left, left2);
        assert_eq!(right, right2);
    }

    #[test]
    fn segment_distance_cases() {
        let a = Vec2::new(0.0, 0.0);
        let b = Vec2::new(4.0, 0.0);
        let (d2, t) = point_segment_distance_sq(Vec2::new(2.0, 3.0), a, b);
        assert!((d2 - 9.0).abs() < 1e-12 && (t - 0.5).abs() < 1e-12);
        let (d2, t) = point_segment_distance_sq(Vec2::new(-3.0, 4.0), a, b);
        assert!((d2 - 25.0).abs() < 1e-12 && t == 0.0);
    }

    #[test]
    fn segment_vjp_matches_finite_differences() {
        let mut rng = Rng::new(5);
        for _ in 0..100 {
            let x = Vec2::new(rng.range(-2.0, 2.0), rng.range(-2.0, 2.0));
            let a = Vec2::new(rng.range(-2.0, 2.0), rng.range(-2.0, 2.0));
            let b = Vec2::new(rng.range(-2.0, 2.0), rng.range(-2.0, 2.0));
            if (b - a).norm() < 0.3 {
                continue;
            }
            let (_, t) = point_segment_distance_sq(x, a, b);
            // Skip parameter-boundary ties where the envelope argument
            // needs one-sided care.
            if t < 1e-3 || t > 1.0 - 1e-3 {
                continue;
            }
            let (ga, gb) = segment_distance_sq_vjp(x, a, b, t, 1.0);
            let eps = 1e-6;
            let fd = |pa: Vec2, pb: Vec2| point_segment_distance_sq(x, pa, pb).0;
            let fda = Vec2::new(
                (fd(a + Vec2::new(eps, 0.0), b) - fd(a - Vec2::new(eps, 0.0), b)) / (2.0 * eps),
                (fd(a + Vec2::new(0.0, eps), b) - fd(a - Vec2::new(0.0, eps), b)) / (2.0 * eps),
            );
            let fdb = Vec2::new(
                (fd(a, b + Vec2::new(eps, 0.0)) - fd(a, b - Vec2::new(eps, 0.0))) / (2.0 * eps),
                (fd(a, b + Vec2::new(0.0, eps)) - fd(a, b - Vec2::new(0.0, eps))) / (2.0 * eps),
            );
            assert!((fda - ga).norm() < 1e-5, "a: {fda:?} vs {ga:?}");
            assert!((fdb - gb).norm() < 1e-5, "b: {fdb:?} vs {gb:?}");
        }
    }
}
