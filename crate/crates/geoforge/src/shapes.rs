//! Procedural test geometry: cubes, spheres, planes.

use crate::math::Vec3;
use crate::mesh::TriangleMesh;
use std::collections::HashMap;

/// Axis-aligned cube from `min` spanning `size` per axis, as 12 triangles
/// with outward winding.
pub fn cube(min: Vec3, size: f64) -> TriangleMesh {
    let s = size;
    let corners = [
        min,
        min + Vec3::new(s, 0.0, 0.0),
        min + Vec3::new(s, s, 0.0),
        min + Vec3::new(0.0, s, 0.0),
        min + Vec3::new(0.0, 0.0, s),
        min + Vec3::new(s, 0.0, s),
        min + Vec3::new(s, s, s),
        min + Vec3::new(0.0, s, s),
    ];
    // Each face as two triangles, counter-clockwise seen from outside.
    let faces: Vec<[usize; 3]> = vec![
        [0, 3, 2], [0, 2, 1], // z = 0
        [4, 5, 6], [4, 6, 7], // z = s
        [0, 1, 5], [0, 5, 4], // y = 0
        [2, 3, 7], [2, 7, 6], // y = s
        [0, 4, 7], [0, 7, 3], // x = 0
        [1, 2, 6], [1, 6, 5], // x = s
    ];
    TriangleMesh::new(corners.to_vec(), faces).unwrap()
}

/// Unit cube on `[0, 1]^3`.
pub fn unit_cube() -> TriangleMesh {
    cube(Vec3::ZERO, 1.0)
}

/// Icosphere: icosahedron subdivided `level` times, vertices projected onto
/// the sphere. Vertex normals are the exact analytic sphere normals.
pub fn icosphere(center: Vec3, radius: f64, level: u32) -> TriangleMesh {
    let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
    let mut vertices: Vec<Vec3> = [
        (-1.0, phi, 0.0),
        (1.0, phi, 0.0),
        (-1.0, -phi, 0.0),
        (1.0, -phi, 0.0),
        (0.0, -1.0, phi),
        (0.0, 1.0, phi),
        (0.0, -1.0, -phi),
        (0.0, 1.0, -phi),
        (phi, 0.0, -1.0),
        (phi, 0.0, 1.0),
        (-phi, 0.0, -1.0),
        (-phi, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vec3::new(x, y, z).normalize())
    .collect();

    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ];

    for _ in 0..level {
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next_faces = Vec::with_capacity(faces.len() * 4);
        for face in &faces {
            let mut mids = [0usize; 3];
            for e in 0..3 {
                let a = face[e];
                let b = face[(e + 1) % 3];
                let key = (a.min(b), a.max(b));
                mids[e] = *midpoint.entry(key).or_insert_with(|| {
                    let m = ((vertices[a] + vertices[b]) * 0.5).normalize();
                    vertices.push(m);
                    vertices.len() - 1
                });
            }
            let [v0, v1, v2] = *face;
            next_faces.push([v0, mids[0], mids[2]]);
            next_faces.push([v1, mids[1], mids[0]]);
            next_faces.push([v2, mids[2], mids[1]]);
            next_faces.push([mids[0], mids[1], mids[2]]);
        }
        faces = next_faces;
    }

    let normals = vertices.clone();
    let positions: Vec<Vec3> = vertices.iter().map(|&v| center + v * radius).collect();
    TriangleMesh::new(positions, faces)
        .unwrap()
        .with_vertex_normals(normals)
        .unwrap()
}

/// Latitude/longitude sphere with `2 * rings * segments` triangles; handy
/// for building meshes with an exact face count.
pub fn uv_sphere(center: Vec3, radius: f64, rings: usize, segments: usize) -> TriangleMesh {
    assert!(rings >= 2 && segments >= 3);
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    // Grid of (rings + 1) x segments vertices; poles are degenerate rows
    // kept as rings of coincident-latitude vertices to preserve the exact
    // 2 * rings * segments face count minus degenerate pole faces.
    for r in 0..=rings {
        let theta = std::f64::consts::PI * r as f64 / rings as f64;
        for s in 0..segments {
            let phi = 2.0 * std::f64::consts::PI * s as f64 / segments as f64;
            vertices.push(
                center
                    + Vec3::new(
                        radius * theta.sin() * phi.cos(),
                        radius * theta.sin() * phi.sin(),
                        radius * theta.cos(),
                    ),
            );
        }
    }
    let idx = |r: usize, s: usize| r * segments + (s % segments);
    for r in 0..rings {
        for s in 0..segments {
            faces.push([idx(r, s), idx(r + 1, s), idx(r + 1, s + 1)]);
            faces.push([idx(r, s), idx(r + 1, s + 1), idx(r, s + 1)]);
        }
    }
    TriangleMesh::new(vertices, faces).unwrap()
}

/// Flat rectangular grid in the z = 0 plane: `(nx + 1) * (ny + 1)` vertices,
/// each quad split along the same diagonal.
pub fn grid_plane(nx: usize, ny: usize, spacing: f64) -> TriangleMesh {
    let mut vertices = Vec::new();
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push(Vec3::new(i as f64 * spacing, j as f64 * spacing, 0.0));
        }
    }
    let idx = |i: usize, j: usize| j * (nx + 1) + i;
    let mut faces = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            faces.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
            faces.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    TriangleMesh::new(vertices, faces).unwrap()
}

/// Regular tetrahedron with the given edge length, centered at the origin.
pub fn tetrahedron(edge: f64) -> TriangleMesh {
    let s = edge / 8.0f64.sqrt();
    let vertices = vec![
        Vec3::new(s, s, s),
        Vec3::new(s, -s, -s),
        Vec3::new(-s, s, -s),
        Vec3::new(-s, -s, s),
    ];
    let faces = vec![[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]];
    TriangleMesh::new(vertices, faces).unwrap()
}
