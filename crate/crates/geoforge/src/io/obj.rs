//! Wavefront OBJ subset: `v` (with optional trailing RGB), `vn`, `f` with
//! 1-based or negative indices and `v/vt/vn` triplets (vt ignored).
//! Polygons are fan-triangulated. Unknown directives and comments are
//! skipped.

use crate::error::{GeoError, Result};
use crate::math::Vec3;
use crate::mesh::TriangleMesh;

fn parse_err(line: usize, message: impl Into<String>) -> GeoError {
    GeoError::Parse {
        line,
        message: message.into(),
    }
}

pub fn parse_obj(text: &str) -> Result<TriangleMesh> {
    let mut vertices: Vec<Vec3> = Vec::new();
    let mut colors: Vec<Vec3> = Vec::new();
    let mut normals: Vec<Vec3> = Vec::new();
    let mut faces: Vec<[usize; 3]> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let tag = fields.next().unwrap();
        match tag {
            "v" => {
                let nums: Vec<f64> = fields
                    .map(|s| {
                        s.parse::<f64>()
                            .map_err(|_| parse_err(line_no, format!("bad number {s:?} in vertex")))
                    })
                    .collect::<Result<_>>()?;
                match nums.len() {
                    3 => vertices.push(Vec3::new(nums[0], nums[1], nums[2])),
                    6 => {
                        vertices.push(Vec3::new(nums[0], nums[1], nums[2]));
                        colors.push(Vec3::new(nums[3], nums[4], nums[5]));
                    }
                    n => {
                        return Err(parse_err(
                            line_no,
                            format!("vertex needs 3 or 6 numbers, found {n}"),
                        ))
                    }
                }
            }
            "vn" => {
                let nums: Vec<f64> = fields
                    .map(|s| {
                        s.parse::<f64>()
                            .map_err(|_| parse_err(line_no, format!("bad number {s:?} in normal")))
                    })
                    .collect::<Result<_>>()?;
                if nums.len() != 3 {
                    return Err(parse_err(line_no, "normal needs 3 numbers"));
                }
                normals.push(Vec3::new(nums[0], nums[1], nums[2]));
            }
            "f" => {
                let mut corner_indices = Vec::new();
                for field in fields {
                    // v, v/vt, v//vn, v/vt/vn: the leading vertex index.
                    let vertex_field = field.split('/').next().unwrap();
                    let idx: i64 = vertex_field
                        .parse()
                        .map_err(|_| parse_err(line_no, format!("bad face index {field:?}")))?;
                    let resolved = if idx > 0 {
                        (idx - 1) as usize
                    } else if idx < 0 {
                        let back = (-idx) as usize;
                        if back > vertices.len() {
                            return Err(parse_err(line_no, format!("negative index {idx} out of range")));
                        }
                        vertices.len() - back
                    } else {
                        return Err(parse_err(line_no, "face index 0 is invalid"));
                    };
                    if resolved >= vertices.len() {
                        return Err(parse_err(
                            line_no,
                            format!("face index {idx} exceeds {} vertices", vertices.len()),
                        ));
                    }
                    corner_indices.push(resolved);
                }
                if corner_indices.len() < 3 {
                    return Err(parse_err(line_no, "face needs at least 3 corners"));
                }
                for k in 1..corner_indices.len() - 1 {
                    faces.push([corner_indices[0], corner_indices[k], corner_indices[k + 1]]);
                }
            }
            _ => {} // comments, groups, materials, vt, ...
        }
    }

    let mut mesh = TriangleMesh::new(vertices, faces).map_err(|e| GeoError::Parse {
        line: 0,
        message: e.to_string(),
    })?;
    if !colors.is_empty() {
        if colors.len() != mesh.num_vertices() {
            return Err(parse_err(0, "some vertices have colors and some do not"));
        }
        mesh = mesh.with_vertex_colors(colors).map_err(|e| GeoError::Parse {
            line: 0,
            message: e.to_string(),
        })?;
    }
    if normals.len() == mesh.num_vertices() {
        // Aligned per-vertex normals (the layout this writer produces).
        if let Ok(with) = mesh.clone().with_vertex_normals(normals) {
            mesh = with;
        }
    }
    Ok(mesh)
}

/// Serialize with 17 significant digits so parsing reproduces every f64
/// bit-exactly.
pub fn write_obj(mesh: &TriangleMesh) -> String {
    let mut out = String::new();
    let colors = mesh.vertex_colors();
    for (i, v) in mesh.vertices().iter().enumerate() {
        match colors {
            Some(c) => out.push_str(&format!(
                "v {:.16e} {:.16e} {:.16e} {:.16e} {:.16e} {:.16e}\n",
                v.x, v.y, v.z, c[i].x, c[i].y, c[i].z
            )),
            None => out.push_str(&format!("v {:.16e} {:.16e} {:.16e}\n", v.x, v.y, v.z)),
        }
    }
    if let Some(normals) = mesh.vertex_normals() {
        for n in normals {
            out.push_str(&format!("vn {:.16e} {:.16e} {:.16e}\n", n.x, n.y, n.z));
        }
        for f in mesh.faces() {
            out.push_str(&format!(
                "f {}//{} {}//{} {}//{}\n",
                f[0] + 1,
                f[0] + 1,
                f[1] + 1,
                f[1] + 1,
                f[2] + 1,
                f[2] + 1
            ));
        }
    } else {
        for f in mesh.faces() {
            out.push_str(&format!("f {} {} {}\n", f[0] + 1, f[1] + 1, f[2] + 1));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;

    #[test]
    fn minimal_triangle() {
        let mesh = parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n").unwrap();
        assert_eq!(mesh.num_vertices(), 3);
        assert_eq!(mesh.faces(), &[[0, 1, 2]]);
    }

    #[test]
    fn negative_indices() {
        let mesh = parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf -3 -2 -1\n").unwrap();
        assert_eq!(mesh.faces(), &[[0, 1, 2]]);
    }

    #[test]
    fn quad_fan_triangulation() {
        let mesh = parse_obj("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n").unwrap();
        assert_eq!(mesh.faces(), &[[0, 1, 2], [0, 2, 3]]);
    }

    #[test]
    fn slash_forms_and_comments() {
        let text = "# header\nv 0 0 0\nv 1 0 0\nv 0 1 0\nvt 0 0\nvn 0 0 1\ns off\nf 1/1/1 2/1/1 3/1/1\n";
        let mesh = parse_obj(text).unwrap();
        assert_eq!(mesh.num_faces(), 1);
    }

    #[test]
    fn errors_carry_line_numbers() {
        match parse_obj("v 0 0 0\nv 1 0 x\n") {
            Err(GeoError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
        match parse_obj("v 0 0 0\nf 1 2 3\n") {
            Err(GeoError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn round_trip_icosphere_exact() {
        let mesh = shapes::icosphere(crate::math::Vec3::new(0.1, -0.2, 0.3), 0.9, 2);
        let text = write_obj(&mesh);
        let back = parse_obj(&text).unwrap();
        assert_eq!(mesh.vertices(), back.vertices());
        assert_eq!(mesh.faces(), back.faces());
        assert_eq!(mesh.vertex_normals().is_some(), back.vertex_normals().is_some());
    }

    #[test]
    fn round_trip_with_colors() {
        let mesh = shapes::unit_cube()
            .with_vertex_colors(
                (0..8)
                    .map(|i| crate::math::Vec3::splat(i as f64 / 7.0))
                    .collect(),
            )
            .unwrap();
        let back = parse_obj(&write_obj(&mesh)).unwrap();
        assert_eq!(mesh.vertex_colors(), back.vertex_colors());
    }
}
