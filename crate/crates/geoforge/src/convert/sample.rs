//! Differentiable surface sampling: mesh to pointcloud.
//!
//! Face choice is proportional to area and barycentric coordinates come from
//! the square-root trick, both driven by the counter RNG, so the result is a
//! pure function of `(mesh, n, seed)` regardless of parallel schedule. The
//! stored barycentric weights are the reparameterization: holding them fixed
//! makes each sample a linear function of the three face vertices, which is
//! what the VJP differentiates.

use rayon::prelude::*;

use crate::error::{GeoError, Result};
use crate::math::Vec3;
use crate::mesh::TriangleMesh;
use crate::rng;

/// Points sampled on a mesh surface, with the face and barycentric weights
/// that reconstruct each point from the vertices.
#[derive(Debug, Clone)]
pub struct SampledPoints {
    pub points: Vec<Vec3>,
    pub face_indices: Vec<usize>,
    pub barycentric: Vec<[f64; 3]>,
}

impl SampledPoints {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Recompute a point from its face and weights; equals `points[i]` to
    /// machine precision by construction.
    pub fn reconstruct(&self, mesh: &TriangleMesh, i: usize) -> Vec3 {
        let [a, b, c] = mesh.triangle(self.face_indices[i]);
        let w = self.barycentric[i];
        a * w[0] + b * w[1] + c * w[2]
    }
}

/// Sample `n` points uniformly on the surface, deterministically in `seed`.
pub fn sample_points_on_mesh(mesh: &TriangleMesh, n: usize, seed: u64) -> Result<SampledPoints> {
    if n == 0 {
        return Err(GeoError::Domain("sample count must be at least 1".into()));
    }
    if mesh.num_faces() == 0 {
        return Err(GeoError::Domain("cannot sample an empty mesh".into()));
    }
    let mut cumulative = Vec::with_capacity(mesh.num_faces());
    let mut total = 0.0;
    for f in 0..mesh.num_faces() {
        total += mesh.face_area(f);
        cumulative.push(total);
    }
    if !(total > 0.0) {
        return Err(GeoError::Domain("all faces are degenerate (zero total area)".into()));
    }

    let samples: Vec<(Vec3, usize, [f64; 3])> = (0..n)
        .into_par_iter()
        .map(|i| {
            let r0 = rng::uniform(seed, i as u64, 0) * total;
            let face = cumulative.partition_point(|&c| c <= r0).min(mesh.num_faces() - 1);
            let r1 = rng::uniform(seed, i as u64, 1);
            let r2 = rng::uniform(seed, i as u64, 2);
            let su = r1.sqrt();
            let w = [1.0 - su, su * (1.0 - r2), su * r2];
            let [a, b, c] = mesh.triangle(face);
            (a * w[0] + b * w[1] + c * w[2], face, w)
        })
        .collect();

    let mut points = Vec::with_capacity(n);
    let mut face_indices = Vec::with_capacity(n);
    let mut barycentric = Vec::with_capacity(n);
    for (p, f, w) in samples {
        points.push(p);
        face_indices.push(f);
        barycentric.push(w);
    }
    Ok(SampledPoints {
        points,
        face_indices,
        barycentric,
    })
}

/// Pull upstream per-sample cotangents back to per-vertex gradients, holding
/// face choices and barycentric weights fixed.
pub fn sample_points_vjp(
    mesh: &TriangleMesh,
    sampled: &SampledPoints,
    upstream: &[Vec3],
) -> Result<Vec<Vec3>> {
    if upstream.len() != sampled.len() {
        return Err(GeoError::Domain(format!(
            "{} upstream cotangents for {} samples",
            upstream.len(),
            sampled.len()
        )));
    }
    let mut grads = vec![Vec3::ZERO; mesh.num_vertices()];
    for i in 0..sampled.len() {
        let face = mesh.faces()[sampled.face_indices[i]];
        let w = sampled.barycentric[i];
        for k in 0..3 {
            grads[face[k]] += upstream[i] * w[k];
        }
    }
    Ok(grads)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_triangles_3_to_1() -> TriangleMesh {
        // Face 0 has area 1.5, face 1 has area 0.5: ratio 3:1.
        TriangleMesh::new(
            vec![
                Vec3::ZERO,
                Vec3::new(3.0, 0.0, 0.0),
                Vec3::new(0.0, 1.0, 0.0),
                Vec3::new(-1.0, 0.0, 0.0),
            ],
            vec![[0, 1, 2], [0, 2, 3]],
        )
        .unwrap()
    }

    #[test]
    fn single_triangle_samples_stay_inside() {
        let mesh = TriangleMesh::new(
            vec![Vec3::ZERO, Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0)],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let s = sample_points_on_mesh(&mesh, 500, 3).unwrap();
        for i in 0..s.len() {
            assert_eq!(s.face_indices[i], 0);
            let w = s.barycentric[i];
            assert!(w.iter().all(|&x| (0.0..=1.0).contains(&x)));
            assert!((w[0] + w[1] + w[2] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn face_choice_follows_area() {
        let mesh = two_triangles_3_to_1();
        let n = 100_000;
        let s = sample_points_on_mesh(&mesh, n, 7).unwrap();
        let frac0 = s.face_indices.iter().filter(|&&f| f == 0).count() as f64 / n as f64;
        // Binomial expectation 0.75; 0.01 is past six sigma.
        assert!((frac0 - 0.75).abs() < 0.01, "face-0 fraction {frac0}");
    }

    #[test]
    fn unit_square_sample_mean() {
        let mesh = TriangleMesh::new(
            vec![
                Vec3::ZERO,
                Vec3::new(1.0, 0.0, 0.0),
                Vec3::new(1.0, 1.0, 0.0),
                Vec3::new(0.0, 1.0, 0.0),
            ],
            vec![[0, 1, 2], [0, 2, 3]],
        )
        .unwrap();
        let n = 100_000;
        let s = sample_points_on_mesh(&mesh, n, 19).unwrap();
        let mean = s.points.iter().fold(Vec3::ZERO, |acc, &p| acc + p) / n as f64;
        assert!((mean - Vec3::new(0.5, 0.5, 0.0)).norm() < 0.005, "mean {mean:?}");
    }

    #[test]
    fn sampling_is_deterministic() {
        let mesh = two_triangles_3_to_1();
        let a = sample_points_on_mesh(&mesh, 1000, 42).unwrap();
        let b = sample_points_on_mesh(&mesh, 1000, 42).unwrap();
        assert_eq!(a.points, b.points);
        assert_eq!(a.face_indices, b.face_indices);
        let c = sample_points_on_mesh(&mesh, 1000, 43).unwrap();
        assert_ne!(a.points, c.points);
    }

    #[test]
    fn reconstruction_identity() {
        let mesh = two_triangles_3_to_1();
        let s = sample_points_on_mesh(&mesh, 2000, 5).unwrap();
        for i in 0..s.len() {
            assert!((s.reconstruct(&mesh, i) - s.points[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn degenerate_mesh_rejected() {
        let mesh = TriangleMesh::new(
            vec![Vec3::ZERO, Vec3::new(1.0, 0.0, 0.0), Vec3::new(2.0, 0.0, 0.0)],
            vec![[0, 1, 2]],
        )
        .unwrap();
        assert!(sample_points_on_mesh(&mesh, 10, 0).is_err());
    }

    #[test]
    fn vjp_zero_upstream_and_vertex_routing() {
        let mesh = two_triangles_3_to_1();
        let s = sample_points_on_mesh(&mesh, 50, 9).unwrap();
        let zeros = vec![Vec3::ZERO; 50];
        assert!(sample_points_vjp(&mesh, &s, &zeros)
            .unwrap()
            .iter()
            .all(|g| g.norm() == 0.0));

        // A synthetic sample sitting exactly on vertex 1 routes the whole
        // cotangent to vertex 1.
        let one = SampledPoints {
            points: vec![mesh.vertices()[1]],
            face_indices: vec![0],
            barycentric: vec![[0.0, 1.0, 0.0]],
        };
        let up = vec![Vec3::new(2.0, -1.0, 0.5)];
        let g = sample_points_vjp(&mesh, &one, &up).unwrap();
        assert_eq!(g[1], up[0]);
        assert!(g[0].norm() == 0.0 && g[2].norm() == 0.0 && g[3].norm() == 0.0);
    }
}
