//! Marching cubes isosurface extraction.
//!
//! The 256-entry case table is generated once at first use instead of being
//! transcribed: for each corner configuration the crossing edges are linked
//! into cycles face by face and fan-triangulated. On a face with four
//! crossings the two cut corners are kept separated; the rule is symmetric,
//! so adjacent cells always agree along their shared face. Triangles are
//! oriented with normals pointing toward larger field values (outward for a
//! signed distance field).

use std::collections::HashMap;
use std::sync::OnceLock;

use crate::error::{GeoError, Result};
use crate::math::Vec3;
use crate::mesh::TriangleMesh;
use crate::voxel::SdfGrid;

/// Corner offsets in the standard marching-cubes numbering.
const CORNERS: [[usize; 3]; 8] = [
    [0, 0, 0],
    [1, 0, 0],
    [1, 1, 0],
    [0, 1, 0],
    [0, 0, 1],
    [1, 0, 1],
    [1, 1, 1],
    [0, 1, 1],
];

/// Edge endpoints (corner indices) in the standard numbering.
const EDGES: [(usize, usize); 12] = [
    (0, 1),
    (1, 2),
    (2, 3),
    (3, 0),
    (4, 5),
    (5, 6),
    (6, 7),
    (7, 4),
    (0, 4),
    (1, 5),
    (2, 6),
    (3, 7),
];

/// Cube faces as corner quads in cyclic order.
const FACES: [[usize; 4]; 6] = [
    [0, 1, 2, 3], // z = 0
    [4, 5, 6, 7], // z = 1
    [0, 1, 5, 4], // y = 0
    [3, 2, 6, 7], // y = 1
    [0, 3, 7, 4], // x = 0
    [1, 2, 6, 5], // x = 1
];

/// Per-configuration triangles, each a triple of edge indices.
struct CaseTable {
    triangles: [Vec<[u8; 3]>; 256],
}

static CASE_TABLE: OnceLock<CaseTable> = OnceLock::new();

fn edge_index(a: usize, b: usize) -> usize {
    let key = (a.min(b), a.max(b));
    EDGES
        .iter()
        .position(|&(p, q)| (p.min(q), p.max(q)) == key)
        .expect("corner pair is a cube edge")
}

fn corner_pos(c: usize) -> Vec3 {
    Vec3::new(CORNERS[c][0] as f64, CORNERS[c][1] as f64, CORNERS[c][2] as f64)
}

/// Trilinear gradient of the field with corner values `v` at point `p`.
fn trilinear_gradient(v: &[f64; 8], p: Vec3) -> Vec3 {
    let mut g = Vec3::ZERO;
    for (c, val) in v.iter().enumerate() {
        let w = |axis: usize| -> f64 {
            if CORNERS[c][axis] == 1 {
                p[axis]
            } else {
                1.0 - p[axis]
            }
        };
        let dw = |axis: usize| -> f64 {
            if CORNERS[c][axis] == 1 {
                1.0
            } else {
                -1.0
            }
        };
        g.x += val * dw(0) * w(1) * w(2);
        g.y += val * w(0) * dw(1) * w(2);
        g.z += val * w(0) * w(1) * dw(2);
    }
    g
}

fn build_case(config: usize) -> Vec<[u8; 3]> {
    let inside = |c: usize| (config >> c) & 1 == 1;
    let crossing: Vec<usize> = (0..12)
        .filter(|&e| inside(EDGES[e].0) != inside(EDGES[e].1))
        .collect();
    if crossing.is_empty() {
        return Vec::new();
    }

    // Each crossing edge gets exactly one partner per incident face.
    let mut partners: HashMap<usize, Vec<usize>> = crossing.iter().map(|&e| (e, Vec::new())).collect();
    for face in &FACES {
        let face_edges: Vec<usize> = (0..4)
            .map(|i| edge_index(face[i], face[(i + 1) % 4]))
            .collect();
        let cuts: Vec<usize> = face_edges
            .iter()
            .copied()
            .filter(|e| partners.contains_key(e))
            .collect();
        match cuts.len() {
            0 => {}
            2 => {
                partners.get_mut(&cuts[0]).unwrap().push(cuts[1]);
                partners.get_mut(&cuts[1]).unwrap().push(cuts[0]);
            }
            4 => {
                // Ambiguous face: pair cuts sharing an inside corner, which
                // keeps the two inside corners separated.
                let inside_end = |e: usize| -> usize {
                    let (a, b) = EDGES[e];
                    if inside(a) {
                        a
                    } else {
                        b
                    }
                };
                for i in 0..4 {
                    for j in (i + 1)..4 {
                        if inside_end(cuts[i]) == inside_end(cuts[j]) {
                            partners.get_mut(&cuts[i]).unwrap().push(cuts[j]);
                            partners.get_mut(&cuts[j]).unwrap().push(cuts[i]);
                        }
                    }
                }
            }
            n => unreachable!("{n} crossings on one face"),
        }
    }
    debug_assert!(partners.values().all(|p| p.len() == 2));

    // Trace closed cycles through the pairings.
    let mut visited: HashMap<usize, bool> = crossing.iter().map(|&e| (e, false)).collect();
    let mut polygons: Vec<Vec<usize>> = Vec::new();
    for &start in &crossing {
        if visited[&start] {
            continue;
        }
        let mut cycle = vec![start];
        visited.insert(start, true);
        let mut prev = start;
        let mut current = partners[&start][0];
        while current != start {
            visited.insert(current, true);
            cycle.push(current);
            let next = if partners[&current][0] == prev {
                partners[&current][1]
            } else {
                partners[&current][0]
            };
            prev = current;
            current = next;
        }
        polygons.push(cycle);
    }

    // Synthetic corner values fix crossing points at edge midpoints.
    let values: [f64; 8] = std::array::from_fn(|c| if inside(c) { -1.0 } else { 1.0 });
    let midpoint = |e: usize| (corner_pos(EDGES[e].0) + corner_pos(EDGES[e].1)) * 0.5;

    let mut triangles = Vec::new();
    for mut cycle in polygons {
        let pts: Vec<Vec3> = cycle.iter().map(|&e| midpoint(e)).collect();
        // Newell normal of the traced loop.
        let mut normal = Vec3::ZERO;
        for i in 0..pts.len() {
            let a = pts[i];
            let b = pts[(i + 1) % pts.len()];
            normal.x += (a.y - b.y) * (a.z + b.z);
            normal.y += (a.z - b.z) * (a.x + b.x);
            normal.z += (a.x - b.x) * (a.y + b.y);
        }
        let centroid = pts.iter().fold(Vec3::ZERO, |s, &p| s + p) / pts.len() as f64;
        let gradient = trilinear_gradient(&values, centroid);
        let orient = normal.dot(gradient);
        debug_assert!(orient.abs() > 1e-12, "degenerate orientation for config {config}");
        if orient < 0.0 {
            cycle.reverse();
        }
        for i in 1..cycle.len() - 1 {
            triangles.push([cycle[0] as u8, cycle[i] as u8, cycle[i + 1] as u8]);
        }
    }
    triangles
}

fn case_table() -> &'static CaseTable {
    CASE_TABLE.get_or_init(|| CaseTable {
        triangles: std::array::from_fn(build_case),
    })
}

/// Extract the `iso` level set of an SDF grid as a triangle mesh.
///
/// Vertices are welded by their lattice edge, positions come from linear
/// interpolation between cell-center samples, and zero-area triangles left
/// by exact corner hits are dropped.
pub fn sdfgrid_to_mesh(sdf: &SdfGrid, iso: f64) -> Result<TriangleMesh> {
    let (rx, ry, rz) = sdf.resolution();
    let below = sdf.values().iter().any(|&v| v < iso);
    let above = sdf.values().iter().any(|&v| v >= iso);
    if !below || !above {
        return Err(GeoError::Domain(format!(
            "grid has no {iso} crossing: all values on one side"
        )));
    }
    if rx < 2 || ry < 2 || rz < 2 {
        return Err(GeoError::Domain("marching cubes needs at least 2 samples per axis".into()));
    }

    let table = case_table();
    let spec = sdf.spec();
    // Welded vertex per (lattice point, axis) edge key.
    let mut vertex_of_edge: HashMap<(usize, usize, usize, u8), usize> = HashMap::new();
    let mut vertices: Vec<Vec3> = Vec::new();
    let mut faces: Vec<[usize; 3]> = Vec::new();

    for k in 0..rz - 1 {
        for j in 0..ry - 1 {
            for i in 0..rx - 1 {
                let mut config = 0usize;
                let mut corner_values = [0.0; 8];
                for (c, off) in CORNERS.iter().enumerate() {
                    let v = sdf.get(i + off[0], j + off[1], k + off[2]);
                    corner_values[c] = v;
                    if v < iso {
                        config |= 1 << c;
                    }
                }
                if config == 0 || config == 255 {
                    continue;
                }
                for tri in &table.triangles[config] {
                    let mut ids = [0usize; 3];
                    for (slot, &e) in tri.iter().enumerate() {
                        let (a, b) = EDGES[e as usize];
                        let pa = (i + CORNERS[a][0], j + CORNERS[a][1], k + CORNERS[a][2]);
                        let pb = (i + CORNERS[b][0], j + CORNERS[b][1], k + CORNERS[b][2]);
                        // Canonical order: lower lattice point first.
                        let (lo, hi, va, vb) = if pa <= pb {
                            (pa, pb, corner_values[a], corner_values[b])
                        } else {
                            (pb, pa, corner_values[b], corner_values[a])
                        };
                        let axis = if lo.0 != hi.0 {
                            0u8
                        } else if lo.1 != hi.1 {
                            1
                        } else {
                            2
                        };
                        let key = (lo.0, lo.1, lo.2, axis);
                        let id = *vertex_of_edge.entry(key).or_insert_with(|| {
                            let t = if (vb - va).abs() < 1e-300 {
                                0.5
                            } else {
                                ((iso - va) / (vb - va)).clamp(0.0, 1.0)
                            };
                            let p_lo = spec.cell_center(lo.0, lo.1, lo.2);
                            let p_hi = spec.cell_center(hi.0, hi.1, hi.2);
                            vertices.push(p_lo + (p_hi - p_lo) * t);
                            vertices.len() - 1
                        });
                        ids[slot] = id;
                    }
                    faces.push(ids);
                }
            }
        }
    }

    // Drop triangles collapsed by welding or exact corner hits.
    faces.retain(|f| {
        if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
            return false;
        }
        let (a, b, c) = (vertices[f[0]], vertices[f[1]], vertices[f[2]]);
        (b - a).cross(c - a).norm_squared() > 4.0 * 1e-18 * 1e-18
    });

    if faces.is_empty() {
        return Err(GeoError::Domain("level set produced no triangles".into()));
    }
    TriangleMesh::new(vertices, faces)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::accel::{build_adjacency, is_watertight};
    use crate::shapes;
    use crate::voxel::GridSpec;
    use crate::math::Aabb;

    fn analytic_sphere_sdf(resolution: usize) -> SdfGrid {
        let bounds = Aabb {
            min: Vec3::splat(-1.3),
            max: Vec3::splat(1.3),
        };
        let spec = GridSpec::fit(&bounds, (resolution, resolution, resolution)).unwrap();
        let mut values = vec![0.0; spec.num_cells()];
        for z in 0..resolution {
            for y in 0..resolution {
                for x in 0..resolution {
                    values[spec.linear(x, y, z)] = spec.cell_center(x, y, z).norm() - 1.0;
                }
            }
        }
        SdfGrid::new(spec, values).unwrap()
    }

    #[test]
    fn case_table_shape() {
        let t = case_table();
        assert!(t.triangles[0].is_empty());
        assert!(t.triangles[255].is_empty());
        // Single inside corner: one triangle across edges 0, 3, 8.
        assert_eq!(t.triangles[1].len(), 1);
        let mut edges: Vec<u8> = t.triangles[1][0].to_vec();
        edges.sort_unstable();
        assert_eq!(edges, vec![0, 3, 8]);
        // Complement config has the same single triangle, opposite winding.
        assert_eq!(t.triangles[254].len(), 1);
    }

    #[test]
    fn sphere_vertices_on_radius() {
        let sdf = analytic_sphere_sdf(32);
        let mesh = sdfgrid_to_mesh(&sdf, 0.0).unwrap();
        assert!(mesh.num_faces() > 100);
        let tol = 2.0 * sdf.voxel_size();
        for v in mesh.vertices() {
            assert!((v.norm() - 1.0).abs() < tol, "vertex at radius {}", v.norm());
        }
    }

    #[test]
    fn sphere_mesh_is_watertight_with_outward_normals() {
        let sdf = analytic_sphere_sdf(24);
        let mesh = sdfgrid_to_mesh(&sdf, 0.0).unwrap();
        let adj = build_adjacency(&mesh).unwrap();
        assert!(is_watertight(&adj));
        for f in 0..mesh.num_faces() {
            let [a, b, c] = mesh.triangle(f);
            let n = (b - a).cross(c - a);
            let centroid = (a + b + c) * (1.0 / 3.0);
            assert!(n.dot(centroid) > 0.0, "face {f} winds inward");
        }
    }

    #[test]
    fn no_degenerate_triangles() {
        let sdf = analytic_sphere_sdf(20);
        let mesh = sdfgrid_to_mesh(&sdf, 0.0).unwrap();
        for f in 0..mesh.num_faces() {
            assert!(mesh.face_area(f) > 1e-18);
        }
    }

    #[test]
    fn constant_sign_grid_rejected() {
        let bounds = Aabb {
            min: Vec3::ZERO,
            max: Vec3::ONE,
        };
        let spec = GridSpec::fit(&bounds, (4, 4, 4)).unwrap();
        let sdf = SdfGrid::new(spec, vec![1.0; spec.num_cells()]).unwrap();
        assert!(sdfgrid_to_mesh(&sdf, 0.0).is_err());
    }

    #[test]
    fn round_trip_through_mesh_sdf() {
        use super::super::sdf::mesh_to_sdfgrid;
        let mesh = shapes::icosphere(Vec3::ZERO, 1.0, 2);
        let sdf = mesh_to_sdfgrid(&mesh, (32, 32, 32), 0.1).unwrap();
        let back = sdfgrid_to_mesh(&sdf, 0.0).unwrap();
        // Every reconstructed vertex lies near the unit sphere.
        for v in back.vertices() {
            assert!((v.norm() - 1.0).abs() < 2.0 * sdf.voxel_size());
        }
    }
}
