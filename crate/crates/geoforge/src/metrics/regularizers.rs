//! Mesh regularizers: uniform-Laplacian magnitude, edge length, and
//! normal-smoothness, each with an analytic VJP.

use crate::accel::MeshAdjacency;
use crate::error::{GeoError, Result};
use crate::math::Vec3;
use crate::mesh::TriangleMesh;

/// `(1/N) sum_v |v - mean(neighbors(v))|^2`.
pub fn laplacian_loss(mesh: &TriangleMesh, adjacency: &MeshAdjacency) -> Result<f64> {
    check_no_isolated(mesh, adjacency)?;
    let lx = adjacency.apply_laplacian(mesh.vertices());
    Ok(lx.iter().map(|r| r.norm_squared()).sum::<f64>() / mesh.num_vertices() as f64)
}

/// Gradient of `laplacian_loss`: `(2/N) L^T (L x)`.
pub fn laplacian_loss_vjp(
    mesh: &TriangleMesh,
    adjacency: &MeshAdjacency,
    upstream: f64,
) -> Result<Vec<Vec3>> {
    check_no_isolated(mesh, adjacency)?;
    let lx = adjacency.apply_laplacian(mesh.vertices());
    let mut grad = adjacency.apply_laplacian_transpose(&lx);
    let scale = 2.0 * upstream / mesh.num_vertices() as f64;
    for g in &mut grad {
        *g = *g * scale;
    }
    Ok(grad)
}

fn check_no_isolated(mesh: &TriangleMesh, adjacency: &MeshAdjacency) -> Result<()> {
    for v in 0..mesh.num_vertices() {
        if adjacency.neighbors(v).is_empty() {
            return Err(GeoError::Domain(format!("vertex {v} has no neighbors")));
        }
    }
    Ok(())
}

/// Mean over unique edges of the squared edge length.
pub fn edge_length_loss(mesh: &TriangleMesh, adjacency: &MeshAdjacency) -> Result<f64> {
    if adjacency.num_edges() == 0 {
        return Err(GeoError::Domain("mesh has no edges".into()));
    }
    let sum: f64 = adjacency
        .edges()
        .iter()
        .map(|&[a, b]| (mesh.vertices()[a] - mesh.vertices()[b]).norm_squared())
        .sum();
    Ok(sum / adjacency.num_edges() as f64)
}

pub fn edge_length_loss_vjp(
    mesh: &TriangleMesh,
    adjacency: &MeshAdjacency,
    upstream: f64,
) -> Result<Vec<Vec3>> {
    if adjacency.num_edges() == 0 {
        return Err(GeoError::Domain("mesh has no edges".into()));
    }
    let mut grad = vec![Vec3::ZERO; mesh.num_vertices()];
    let scale = 2.0 * upstream / adjacency.num_edges() as f64;
    for &[a, b] in adjacency.edges() {
        let d = (mesh.vertices()[a] - mesh.vertices()[b]) * scale;
        grad[a] += d;
        grad[b] -= d;
    }
    Ok(grad)
}

/// Mean over interior edges of `1 - cos(theta)` between the two incident
/// face normals. Zero on flat surfaces.
pub fn smoothness_loss(mesh: &TriangleMesh, adjacency: &MeshAdjacency) -> Result<f64> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for e in adjacency.interior_edges() {
        let faces = adjacency.edge_faces(e);
        let n0 = face_normal(mesh, faces[0])?;
        let n1 = face_normal(mesh, faces[1])?;
        sum += 1.0 - n0.dot(n1);
        count += 1;
    }
    if count == 0 {
        return Err(GeoError::Domain("mesh has no interior edges".into()));
    }
    Ok(sum / count as f64)
}

pub fn smoothness_loss_vjp(
    mesh: &TriangleMesh,
    adjacency: &MeshAdjacency,
    upstream: f64,
) -> Result<Vec<Vec3>> {
    let interior: Vec<usize> = adjacency.interior_edges().collect();
    if interior.is_empty() {
        return Err(GeoError::Domain("mesh has no interior edges".into()));
    }
    let mut grad = vec![Vec3::ZERO; mesh.num_vertices()];
    let scale = upstream / interior.len() as f64;
    for e in interior {
        let faces = adjacency.edge_faces(e);
        let n0 = face_normal(mesh, faces[0])?;
        let n1 = face_normal(mesh, faces[1])?;
        // d(1 - n0.n1) = -n1 . dn0 - n0 . dn1.
        accumulate_normal_grad(mesh, faces[0], n1 * -scale, &mut grad);
        accumulate_normal_grad(mesh, faces[1], n0 * -scale, &mut grad);
    }
    Ok(grad)
}

fn face_normal(mesh: &TriangleMesh, f: usize) -> Result<Vec3> {
    mesh.face_area_vector(f)
        .try_normalize()
        .ok_or_else(|| GeoError::Domain(format!("face {f} is degenerate")))
}

/// Accumulate the gradient of `g_n . normalize(cross(b - a, c - a))` into
/// the face's three vertices.
fn accumulate_normal_grad(mesh: &TriangleMesh, f: usize, g_n: Vec3, grad: &mut [Vec3]) {
    let [ia, ib, ic] = mesh.faces()[f];
    let a = mesh.vertices()[ia];
    let b = mesh.vertices()[ib];
    let c = mesh.vertices()[ic];
    let e1 = b - a;
    let e2 = c - a;
    let m = e1.cross(e2);
    let len = m.norm();
    if len < 1e-300 {
        return;
    }
    let n = m / len;
    // d n / d m = (I - n n^T) / |m| applied to the cotangent.
    let g_m = (g_n - n * n.dot(g_n)) / len;
    let g_e1 = e2.cross(g_m);
    let g_e2 = g_m.cross(e1);
    grad[ib] += g_e1;
    grad[ic] += g_e2;
    grad[ia] -= g_e1 + g_e2;
}
