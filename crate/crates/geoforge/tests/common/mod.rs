//! Independent oracles for integration tests. Everything here re-derives
//! results through a different route than the library (closed-form algebra,
//! exhaustive enumeration, or a textbook algorithm) so the comparisons stay
//! meaningful.

#![allow(dead_code)]

use geoforge::math::Vec3;
use geoforge::mesh::TriangleMesh;
use geoforge::voxel::{Odm, Sign, VoxelGrid};

/// Exact point-triangle distance by solving the constrained quadratic:
/// minimize |a + s e1 + t e2 - p|^2 over the simplex, falling back to the
/// three edges when the unconstrained optimum leaves it.
pub fn point_triangle_distance_oracle(p: Vec3, a: Vec3, b: Vec3, c: Vec3) -> f64 {
    let e1 = b - a;
    let e2 = c - a;
    let d = a - p;
    let g11 = e1.dot(e1);
    let g12 = e1.dot(e2);
    let g22 = e2.dot(e2);
    let r1 = -e1.dot(d);
    let r2 = -e2.dot(d);
    let det = g11 * g22 - g12 * g12;

    let mut best = f64::INFINITY;
    if det.abs() > 1e-300 {
        let s = (g22 * r1 - g12 * r2) / det;
        let t = (g11 * r2 - g12 * r1) / det;
        if s >= 0.0 && t >= 0.0 && s + t <= 1.0 {
            let q = a + e1 * s + e2 * t;
            best = best.min((q - p).norm_squared());
        }
    }
    for (u, v) in [(a, b), (b, c), (c, a)] {
        let uv = v - u;
        let len2 = uv.norm_squared();
        let t = if len2 > 0.0 {
            (uv.dot(p - u) / len2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let q = u + uv * t;
        best = best.min((q - p).norm_squared());
    }
    best.sqrt()
}

/// Minimum point-mesh distance by exhaustive scan.
pub fn brute_force_closest_distance(mesh: &TriangleMesh, p: Vec3) -> f64 {
    (0..mesh.num_faces())
        .map(|f| {
            let [a, b, c] = mesh.triangle(f);
            point_triangle_distance_oracle(p, a, b, c)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Ray-triangle test by plane intersection plus half-space sign checks (a
/// different formulation than Moller-Trumbore). Returns `t` and whether the
/// hit is within `edge_eps` of the triangle boundary in barycentric terms.
pub fn ray_triangle_oracle(
    origin: Vec3,
    direction: Vec3,
    a: Vec3,
    b: Vec3,
    c: Vec3,
    edge_eps: f64,
) -> Option<(f64, bool)> {
    let n = (b - a).cross(c - a);
    let denom = n.dot(direction);
    if denom.abs() < 1e-300 {
        return None;
    }
    let t = n.dot(a - origin) / denom;
    if t <= 1e-12 {
        return None;
    }
    let q = origin + direction * t;
    // Barycentric via areas.
    let area2 = n.norm_squared();
    let w0 = (b - q).cross(c - q).dot(n) / area2;
    let w1 = (c - q).cross(a - q).dot(n) / area2;
    let w2 = (a - q).cross(b - q).dot(n) / area2;
    let min_w = w0.min(w1).min(w2);
    if min_w < -edge_eps {
        return None;
    }
    Some((t, min_w < edge_eps))
}

/// Parity of ray-mesh crossings by exhaustive triangle scan; `None` when
/// any hit grazes an edge and the parity is unreliable.
pub fn brute_force_parity(mesh: &TriangleMesh, origin: Vec3, direction: Vec3) -> Option<bool> {
    let mut count = 0usize;
    for f in 0..mesh.num_faces() {
        let [a, b, c] = mesh.triangle(f);
        match ray_triangle_oracle(origin, direction, a, b, c, 1e-10) {
            Some((_, true)) => return None,
            Some((_, false)) => count += 1,
            None => {}
        }
    }
    Some(count % 2 == 1)
}

/// Separating-axis triangle/box overlap, written as a generic
/// project-both-shapes-and-compare loop over all 13 candidate axes.
pub fn tri_box_overlap_oracle(center: Vec3, half: Vec3, tri: &[Vec3; 3]) -> bool {
    let verts: Vec<Vec3> = tri.iter().map(|&v| v - center).collect();
    let edges = [verts[1] - verts[0], verts[2] - verts[1], verts[0] - verts[2]];
    let box_axes = [
        Vec3::new(1.0, 0.0, 0.0),
        Vec3::new(0.0, 1.0, 0.0),
        Vec3::new(0.0, 0.0, 1.0),
    ];
    let mut axes: Vec<Vec3> = Vec::with_capacity(13);
    axes.extend_from_slice(&box_axes);
    axes.push(edges[0].cross(edges[1]));
    for e in &edges {
        for b in &box_axes {
            axes.push(e.cross(*b));
        }
    }
    for axis in axes {
        if axis.norm_squared() < 1e-24 {
            continue;
        }
        let mut t_min = f64::INFINITY;
        let mut t_max = f64::NEG_INFINITY;
        for v in &verts {
            let p = v.dot(axis);
            t_min = t_min.min(p);
            t_max = t_max.max(p);
        }
        let r = half.x * axis.x.abs() + half.y * axis.y.abs() + half.z * axis.z.abs();
        if t_min > r || t_max < -r {
            return false;
        }
    }
    true
}

/// Exact assignment optimum by the Hungarian algorithm with potentials
/// (O(n^3)); used to certify the auction's gap bound.
pub fn hungarian_min_cost(costs: &[Vec<f64>]) -> (f64, Vec<usize>) {
    let n = costs.len();
    assert!(n > 0 && costs.iter().all(|row| row.len() == n));
    const INF: f64 = f64::INFINITY;
    // 1-indexed potentials over rows (u) and columns (v).
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut p = vec![0usize; n + 1]; // p[j]: row matched to column j

    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![INF; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = INF;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = costs[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![0usize; n];
    let mut total = 0.0;
    for j in 1..=n {
        assignment[p[j] - 1] = j - 1;
        total += costs[p[j] - 1][j - 1];
    }
    (total, assignment)
}

/// Visual hull of an occupancy grid from its six axis ODMs, derived
/// directly from the definition: a cell survives iff no ODM ray passes it
/// before that ray's first hit.
pub fn visual_hull_oracle(full: &VoxelGrid, odms: &[Odm]) -> Vec<bool> {
    let res = [
        full.resolution().0,
        full.resolution().1,
        full.resolution().2,
    ];
    let mut keep = vec![true; res[0] * res[1] * res[2]];
    for z in 0..res[2] {
        for y in 0..res[1] {
            for x in 0..res[0] {
                let coords = [x, y, z];
                let idx = full.spec().linear(x, y, z);
                for odm in odms {
                    let w = odm.axis.index();
                    let (ua, va) = odm.axis.cross_axes();
                    let along = match odm.direction {
                        Sign::Positive => coords[w],
                        Sign::Negative => res[w] - 1 - coords[w],
                    };
                    if along < odm.depth(coords[ua], coords[va]) {
                        keep[idx] = false;
                        break;
                    }
                }
            }
        }
    }
    keep
}

/// Deterministic pseudo-random mesh: jittered icosphere.
pub fn bumpy_sphere(seed: u64, level: u32) -> TriangleMesh {
    let base = geoforge::shapes::icosphere(Vec3::ZERO, 1.0, level);
    let verts: Vec<Vec3> = base
        .vertices()
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let r = 1.0 + 0.25 * (geoforge::rng::uniform(seed, i as u64, 0) - 0.5);
            v * r
        })
        .collect();
    TriangleMesh::new(verts, base.faces().to_vec()).unwrap()
}

#[cfg(test)]
mod oracle_self_tests {
    use super::*;
    use geoforge::rng::Rng;

    #[test]
    fn hungarian_matches_exhaustive_permutations() {
        fn permutations(n: usize) -> Vec<Vec<usize>> {
            if n == 1 {
                return vec![vec![0]];
            }
            let mut out = Vec::new();
            for p in permutations(n - 1) {
                for k in 0..n {
                    let mut q: Vec<usize> = p.iter().map(|&x| if x >= k { x + 1 } else { x }).collect();
                    q.push(k);
                    out.push(q);
                }
            }
            out
        }
        let mut rng = Rng::new(99);
        for n in 1..=5 {
            for _ in 0..20 {
                let costs: Vec<Vec<f64>> = (0..n)
                    .map(|_| (0..n).map(|_| rng.uniform()).collect())
                    .collect();
                let best_exhaustive = permutations(n)
                    .into_iter()
                    .map(|perm| (0..n).map(|i| costs[i][perm[i]]).sum::<f64>())
                    .fold(f64::INFINITY, f64::min);
                let (hungarian, _) = hungarian_min_cost(&costs);
                assert!(
                    (hungarian - best_exhaustive).abs() < 1e-12,
                    "n={n}: {hungarian} vs {best_exhaustive}"
                );
            }
        }
    }
}
