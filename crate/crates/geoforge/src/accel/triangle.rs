//! Exact point-triangle and ray-triangle primitives.

use crate::math::Vec3;

/// Barycentric proximity below which a ray hit counts as edge-grazing.
pub const EDGE_GRAZE_EPSILON: f64 = 1e-10;

/// Minimum ray parameter for a hit to count.
pub const RAY_T_EPSILON: f64 = 1e-12;

/// Closest point on triangle `(a, b, c)` to `p` (Ericson's region method).
/// Exact for degenerate (collinear) triangles as well, which collapse to
/// their edges.
pub fn closest_point_on_triangle(p: Vec3, a: Vec3, b: Vec3, c: Vec3) -> Vec3 {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;

    let d1 = ab.dot(ap);
    let d2 = ac.dot(ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return a;
    }

    let bp = p - b;
    let d3 = ab.dot(bp);
    let d4 = ac.dot(bp);
    if d3 >= 0.0 && d4 <= d3 {
        return b;
    }

    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let denom = d1 - d3;
        let v = if denom > 0.0 { d1 / denom } else { 0.0 };
        return a + ab * v;
    }

    let cp = p - c;
    let d5 = ab.dot(cp);
    let d6 = ac.dot(cp);
    if d6 >= 0.0 && d5 <= d6 {
        return c;
    }

    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let denom = d2 - d6;
        let w = if denom > 0.0 { d2 / denom } else { 0.0 };
        return a + ac * w;
    }

    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let denom = (d4 - d3) + (d5 - d6);
        let w = if denom > 0.0 { (d4 - d3) / denom } else { 0.0 };
        return b + (c - b) * w;
    }

    let denom = va + vb + vc;
    if denom.abs() < f64::MIN_POSITIVE {
        // Degenerate triangle: fall back to the best edge point.
        let candidates = [
            closest_point_on_segment(p, a, b),
            closest_point_on_segment(p, b, c),
            closest_point_on_segment(p, c, a),
        ];
        return candidates
            .into_iter()
            .min_by(|x, y| (*x - p).norm_squared().partial_cmp(&(*y - p).norm_squared()).unwrap())
            .unwrap();
    }
    let v = vb / denom;
    let w = vc / denom;
    a + ab * v + ac * w
}

pub fn closest_point_on_segment(p: Vec3, a: Vec3, b: Vec3) -> Vec3 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 <= 0.0 {
        return a;
    }
    let t = (ab.dot(p - a) / len2).clamp(0.0, 1.0);
    a + ab * t
}

/// A ray-triangle intersection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleRayHit {
    pub t: f64,
    /// Barycentric coordinates (w0, w1, w2) of the hit wrt (a, b, c).
    pub barycentric: [f64; 3],
    /// True when the hit passes within `EDGE_GRAZE_EPSILON` of an edge or
    /// vertex; the parity of such hits is unreliable and callers retry with
    /// a jittered direction.
    pub edge_grazing: bool,
}

/// Moller-Trumbore intersection with `t > RAY_T_EPSILON`, flagging hits
/// whose barycentric coordinates come within `EDGE_GRAZE_EPSILON` of zero.
pub fn ray_triangle_intersect(
    origin: Vec3,
    direction: Vec3,
    a: Vec3,
    b: Vec3,
    c: Vec3,
) -> Option<TriangleRayHit> {
    let e1 = b - a;
    let e2 = c - a;
    let pvec = direction.cross(e2);
    let det = e1.dot(pvec);
    if det.abs() < 1e-300 {
        return None; // Ray parallel to the triangle plane.
    }
    let inv_det = 1.0 / det;
    let tvec = origin - a;
    let u = tvec.dot(pvec) * inv_det;
    let qvec = tvec.cross(e1);
    let v = direction.dot(qvec) * inv_det;
    let w = 1.0 - u - v;

    // Accept slightly-outside hits so the grazing flag fires on both sides
    // of an edge; clean misses stay misses.
    let graze = u.abs() < EDGE_GRAZE_EPSILON
        || v.abs() < EDGE_GRAZE_EPSILON
        || w.abs() < EDGE_GRAZE_EPSILON;
    if u < -EDGE_GRAZE_EPSILON || v < -EDGE_GRAZE_EPSILON || w < -EDGE_GRAZE_EPSILON {
        return None;
    }
    if !graze && (u < 0.0 || v < 0.0 || w < 0.0) {
        return None;
    }

    let t = e2.dot(qvec) * inv_det;
    if t <= RAY_T_EPSILON {
        return None;
    }
    Some(TriangleRayHit {
        t,
        barycentric: [w, u, v],
        edge_grazing: graze,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closest_point_regions() {
        let a = Vec3::ZERO;
        let b = Vec3::new(2.0, 0.0, 0.0);
        let c = Vec3::new(0.0, 2.0, 0.0);
        // Above the interior.
        let q = closest_point_on_triangle(Vec3::new(0.5, 0.5, 3.0), a, b, c);
        assert!((q - Vec3::new(0.5, 0.5, 0.0)).norm() < 1e-15);
        // Vertex region.
        let q = closest_point_on_triangle(Vec3::new(-1.0, -1.0, 0.0), a, b, c);
        assert_eq!(q, a);
        // Edge region.
        let q = closest_point_on_triangle(Vec3::new(1.0, -5.0, 0.0), a, b, c);
        assert!((q - Vec3::new(1.0, 0.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn ray_hits_triangle_interior() {
        let a = Vec3::ZERO;
        let b = Vec3::new(1.0, 0.0, 0.0);
        let c = Vec3::new(0.0, 1.0, 0.0);
        let hit = ray_triangle_intersect(
            Vec3::new(0.25, 0.25, -1.0),
            Vec3::new(0.0, 0.0, 1.0),
            a,
            b,
            c,
        )
        .unwrap();
        assert!((hit.t - 1.0).abs() < 1e-12);
        assert!(!hit.edge_grazing);
        let p = a * hit.barycentric[0] + b * hit.barycentric[1] + c * hit.barycentric[2];
        assert!((p - Vec3::new(0.25, 0.25, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn ray_edge_hit_is_flagged() {
        let a = Vec3::ZERO;
        let b = Vec3::new(1.0, 0.0, 0.0);
        let c = Vec3::new(0.0, 1.0, 0.0);
        let hit = ray_triangle_intersect(
            Vec3::new(0.5, 0.0, -1.0),
            Vec3::new(0.0, 0.0, 1.0),
            a,
            b,
            c,
        )
        .unwrap();
        assert!(hit.edge_grazing);
    }

    #[test]
    fn ray_behind_origin_is_ignored() {
        let a = Vec3::ZERO;
        let b = Vec3::new(1.0, 0.0, 0.0);
        let c = Vec3::new(0.0, 1.0, 0.0);
        assert!(ray_triangle_intersect(
            Vec3::new(0.25, 0.25, -1.0),
            Vec3::new(0.0, 0.0, -1.0),
            a,
            b,
            c
        )
        .is_none());
    }
}
