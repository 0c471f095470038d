//! Separating-axis triangle/box overlap (Akenine-Moller's 13-axis test).

use crate::math::Vec3;

/// True when the triangle overlaps the axis-aligned box given by center and
/// half-extents. Touching counts as overlap.
pub fn triangle_box_overlap(center: Vec3, half: Vec3, tri: &[Vec3; 3]) -> bool {
    let v0 = tri[0] - center;
    let v1 = tri[1] - center;
    let v2 = tri[2] - center;

    let e0 = v1 - v0;
    let e1 = v2 - v1;
    let e2 = v0 - v2;

    // 9 cross-product axes e_i x box_axis_j. For each, the edge's two
    // endpoints project identically, so only two distinct projections exist.
    let separated = |p0: f64, p1: f64, rad: f64| -> bool {
        let (min, max) = if p0 < p1 { (p0, p1) } else { (p1, p0) };
        min > rad || max < -rad
    };

    // e0 x X, e0 x Y, e0 x Z
    {
        let (fex, fey, fez) = (e0.x.abs(), e0.y.abs(), e0.z.abs());
        if separated(
            e0.z * v0.y - e0.y * v0.z,
            e0.z * v2.y - e0.y * v2.z,
            fez * half.y + fey * half.z,
        ) {
            return false;
        }
        if separated(
            -e0.z * v0.x + e0.x * v0.z,
            -e0.z * v2.x + e0.x * v2.z,
            fez * half.x + fex * half.z,
        ) {
            return false;
        }
        if separated(
            e0.y * v1.x - e0.x * v1.y,
            e0.y * v2.x - e0.x * v2.y,
            fey * half.x + fex * half.y,
        ) {
            return false;
        }
    }
    // e1 x X, e1 x Y, e1 x Z
    {
        let (fex, fey, fez) = (e1.x.abs(), e1.y.abs(), e1.z.abs());
        if separated(
            e1.z * v0.y - e1.y * v0.z,
            e1.z * v2.y - e1.y * v2.z,
            fez * half.y + fey * half.z,
        ) {
            return false;
        }
        if separated(
            -e1.z * v0.x + e1.x * v0.z,
            -e1.z * v2.x + e1.x * v2.z,
            fez * half.x + fex * half.z,
        ) {
            return false;
        }
        if separated(
            e1.y * v0.x - e1.x * v0.y,
            e1.y * v1.x - e1.x * v1.y,
            fey * half.x + fex * half.y,
        ) {
            return false;
        }
    }
    // e2 x X, e2 x Y, e2 x Z
    {
        let (fex, fey, fez) = (e2.x.abs(), e2.y.abs(), e2.z.abs());
        if separated(
            e2.z * v0.y - e2.y * v0.z,
            e2.z * v1.y - e2.y * v1.z,
            fez * half.y + fey * half.z,
        ) {
            return false;
        }
        if separated(
            -e2.z * v0.x + e2.x * v0.z,
            -e2.z * v1.x + e2.x * v1.z,
            fez * half.x + fex * half.z,
        ) {
            return false;
        }
        if separated(
            e2.y * v1.x - e2.x * v1.y,
            e2.y * v2.x - e2.x * v2.y,
            fey * half.x + fex * half.y,
        ) {
            return false;
        }
    }

    // The box's own axes.
    for i in 0..3 {
        let lo = v0[i].min(v1[i]).min(v2[i]);
        let hi = v0[i].max(v1[i]).max(v2[i]);
        if lo > half[i] || hi < -half[i] {
            return false;
        }
    }

    // The triangle plane.
    let normal = e0.cross(e1);
    let r = half.x * normal.x.abs() + half.y * normal.y.abs() + half.z * normal.z.abs();
    let d = normal.dot(v0);
    d.abs() <= r
}
