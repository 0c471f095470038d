//! Mesh connectivity: unique edges, incidence, neighbor lists, and the
//! uniform graph Laplacian, built in one hash-map pass over the faces.

use std::collections::HashMap;

use crate::error::{GeoError, Result};
use crate::math::Vec3;
use crate::mesh::TriangleMesh;

/// Connectivity of a triangle mesh.
///
/// `uniform_laplacian` encodes row v of `L x = x_v - mean(neighbors of v)`
/// implicitly through `vertex_neighbors`; `apply_laplacian` and
/// `apply_laplacian_transpose` realize the operator and its adjoint.
#[derive(Debug, Clone)]
pub struct MeshAdjacency {
    /// Unique undirected edges, each pair sorted, list sorted lexicographically.
    edges: Vec<[usize; 2]>,
    /// 1-2 incident faces per edge, in face-index order.
    edge_to_faces: Vec<Vec<usize>>,
    /// Sorted neighbor vertices per vertex.
    vertex_neighbors: Vec<Vec<usize>>,
    /// Edge-sharing faces per face (up to 3), sorted.
    face_adjacency: Vec<Vec<usize>>,
    num_vertices: usize,
}

/// Single hash pass over faces: O(M) expected construction.
pub fn build_adjacency(mesh: &TriangleMesh) -> Result<MeshAdjacency> {
    let n = mesh.num_vertices();
    let mut edge_map: HashMap<(usize, usize), usize> = HashMap::with_capacity(mesh.num_faces() * 3 / 2 + 1);
    let mut edges: Vec<[usize; 2]> = Vec::with_capacity(mesh.num_faces() * 3 / 2 + 1);
    let mut edge_to_faces: Vec<Vec<usize>> = Vec::with_capacity(edges.capacity());

    for (f, face) in mesh.faces().iter().enumerate() {
        for e in 0..3 {
            let a = face[e];
            let b = face[(e + 1) % 3];
            if a == b {
                return Err(GeoError::Domain(format!("face {f} repeats vertex {a}")));
            }
            let key = (a.min(b), a.max(b));
            let idx = *edge_map.entry(key).or_insert_with(|| {
                edges.push([key.0, key.1]);
                edge_to_faces.push(Vec::with_capacity(2));
                edges.len() - 1
            });
            if edge_to_faces[idx].len() == 2 {
                return Err(GeoError::NonManifold(key.0, key.1));
            }
            edge_to_faces[idx].push(f);
        }
    }

    // Sort edges (and their face lists) for a face-order-independent layout.
    let mut perm: Vec<usize> = (0..edges.len()).collect();
    perm.sort_unstable_by_key(|&i| edges[i]);
    let edges: Vec<[usize; 2]> = perm.iter().map(|&i| edges[i]).collect();
    let edge_to_faces: Vec<Vec<usize>> = perm.iter().map(|&i| edge_to_faces[i].clone()).collect();

    let mut vertex_neighbors: Vec<Vec<usize>> = vec![Vec::new(); n];
    for e in &edges {
        vertex_neighbors[e[0]].push(e[1]);
        vertex_neighbors[e[1]].push(e[0]);
    }
    for nb in &mut vertex_neighbors {
        nb.sort_unstable();
    }

    let mut face_adjacency: Vec<Vec<usize>> = vec![Vec::new(); mesh.num_faces()];
    for faces in &edge_to_faces {
        if let [f0, f1] = faces[..] {
            face_adjacency[f0].push(f1);
            face_adjacency[f1].push(f0);
        }
    }
    for fa in &mut face_adjacency {
        fa.sort_unstable();
    }

    Ok(MeshAdjacency {
        edges,
        edge_to_faces,
        vertex_neighbors,
        face_adjacency,
        num_vertices: n,
    })
}

/// True iff every edge has exactly two incident faces.
pub fn is_watertight(adjacency: &MeshAdjacency) -> bool {
    adjacency.edge_to_faces.iter().all(|f| f.len() == 2)
}

impl MeshAdjacency {
    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn edge_faces(&self, edge: usize) -> &[usize] {
        &self.edge_to_faces[edge]
    }

    pub fn neighbors(&self, vertex: usize) -> &[usize] {
        &self.vertex_neighbors[vertex]
    }

    pub fn face_neighbors(&self, face: usize) -> &[usize] {
        &self.face_adjacency[face]
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Edges with exactly two incident faces.
    pub fn interior_edges(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.edges.len()).filter(|&e| self.edge_to_faces[e].len() == 2)
    }

    /// `(L x)_v = x_v - mean(x_u : u adjacent to v)`; vertices without
    /// neighbors map to zero.
    pub fn apply_laplacian(&self, x: &[Vec3]) -> Vec<Vec3> {
        assert_eq!(x.len(), self.num_vertices);
        let mut out = vec![Vec3::ZERO; x.len()];
        for (v, nb) in self.vertex_neighbors.iter().enumerate() {
            if nb.is_empty() {
                continue;
            }
            let mut mean = Vec3::ZERO;
            for &u in nb {
                mean += x[u];
            }
            out[v] = x[v] - mean / nb.len() as f64;
        }
        out
    }

    /// Adjoint of `apply_laplacian` under the standard inner product.
    pub fn apply_laplacian_transpose(&self, y: &[Vec3]) -> Vec<Vec3> {
        assert_eq!(y.len(), self.num_vertices);
        let mut out = vec![Vec3::ZERO; y.len()];
        for (v, nb) in self.vertex_neighbors.iter().enumerate() {
            if nb.is_empty() {
                continue;
            }
            out[v] += y[v];
            let w = 1.0 / nb.len() as f64;
            for &u in nb {
                out[u] -= y[v] * w;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;

    #[test]
    fn single_triangle_edges() {
        let mesh = TriangleMesh::new(
            vec![Vec3::ZERO, Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0)],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let adj = build_adjacency(&mesh).unwrap();
        assert_eq!(adj.num_edges(), 3);
        assert!(adj.edge_to_faces.iter().all(|f| f.len() == 1));
        assert!(!is_watertight(&adj));
    }

    #[test]
    fn cube_satisfies_euler_formula() {
        let mesh = shapes::unit_cube();
        let adj = build_adjacency(&mesh).unwrap();
        assert_eq!(adj.num_edges(), 18);
        assert!(adj.edge_to_faces.iter().all(|f| f.len() == 2));
        assert!(is_watertight(&adj));
        // V - E + F = 8 - 18 + 12 = 2.
        assert_eq!(
            mesh.num_vertices() as i64 - adj.num_edges() as i64 + mesh.num_faces() as i64,
            2
        );
    }

    #[test]
    fn laplacian_of_constant_field_is_zero() {
        let mesh = shapes::icosphere(Vec3::ZERO, 1.0, 2);
        let adj = build_adjacency(&mesh).unwrap();
        let constant = vec![Vec3::new(3.0, -1.0, 2.0); mesh.num_vertices()];
        for r in adj.apply_laplacian(&constant) {
            assert!(r.norm() < 1e-12);
        }
    }

    #[test]
    fn laplacian_rows_sum_to_zero() {
        // <L x, 1> = 0 per component for any x, since each row sums to zero.
        let mesh = shapes::icosphere(Vec3::ZERO, 1.0, 1);
        let adj = build_adjacency(&mesh).unwrap();
        let x: Vec<Vec3> = mesh.vertices().to_vec();
        let lx = adj.apply_laplacian(&x);
        // Check the adjoint against the operator: <Lx, y> == <x, L^T y>.
        let y: Vec<Vec3> = mesh
            .vertices()
            .iter()
            .map(|v| Vec3::new(v.z, v.x * 2.0, -v.y))
            .collect();
        let lty = adj.apply_laplacian_transpose(&y);
        let lhs: f64 = lx.iter().zip(&y).map(|(a, b)| a.dot(*b)).sum();
        let rhs: f64 = x.iter().zip(&lty).map(|(a, b)| a.dot(*b)).sum();
        assert!((lhs - rhs).abs() < 1e-10);
    }

    #[test]
    fn non_manifold_edge_reported() {
        // Three triangles sharing the edge (0, 1).
        let mesh = TriangleMesh::new(
            vec![
                Vec3::ZERO,
                Vec3::new(1.0, 0.0, 0.0),
                Vec3::new(0.0, 1.0, 0.0),
                Vec3::new(0.0, 0.0, 1.0),
                Vec3::new(0.0, -1.0, 0.0),
            ],
            vec![[0, 1, 2], [0, 1, 3], [0, 1, 4]],
        )
        .unwrap();
        match build_adjacency(&mesh) {
            Err(GeoError::NonManifold(0, 1)) => {}
            other => panic!("expected NonManifold(0, 1), got {other:?}"),
        }
    }

    #[test]
    fn adjacency_invariant_to_face_order() {
        let mesh = shapes::icosphere(Vec3::ZERO, 1.0, 1);
        let mut faces = mesh.faces().to_vec();
        faces.reverse();
        let shuffled = TriangleMesh::new(mesh.vertices().to_vec(), faces).unwrap();
        let a = build_adjacency(&mesh).unwrap();
        let b = build_adjacency(&shuffled).unwrap();
        assert_eq!(a.edges, b.edges);
        assert_eq!(a.vertex_neighbors, b.vertex_neighbors);
        let x: Vec<Vec3> = mesh.vertices().to_vec();
        let la = a.apply_laplacian(&x);
        let lb = b.apply_laplacian(&x);
        for (p, q) in la.iter().zip(&lb) {
            assert!((*p - *q).norm() < 1e-15);
        }
    }

    #[test]
    fn sphere_with_hole_is_open() {
        let mesh = shapes::icosphere(Vec3::ZERO, 1.0, 1);
        let mut faces = mesh.faces().to_vec();
        faces.pop();
        let open = TriangleMesh::new(mesh.vertices().to_vec(), faces).unwrap();
        let adj = build_adjacency(&open).unwrap();
        assert!(!is_watertight(&adj));
        assert!(is_watertight(&build_adjacency(&mesh).unwrap()));
    }
}
