//! OFF mesh format: header, counts, vertex lines, polygon lines
//! (fan-triangulated).

use crate::error::{GeoError, Result};
use crate::math::Vec3;
use crate::mesh::TriangleMesh;

fn parse_err(line: usize, message: impl Into<String>) -> GeoError {
    GeoError::Parse {
        line,
        message: message.into(),
    }
}

pub fn parse_off(text: &str) -> Result<TriangleMesh> {
    // Strip comments and blanks, remembering original line numbers.
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
        .collect();
    if lines.is_empty() {
        return Err(parse_err(0, "empty OFF file"));
    }
    let mut cursor = 0;
    if lines[0].1.eq_ignore_ascii_case("OFF") {
        cursor = 1;
    } else if !lines[0].1.starts_with(|c: char| c.is_ascii_digit()) {
        return Err(parse_err(lines[0].0, "expected OFF header or counts"));
    }
    let (counts_line, counts_text) = lines
        .get(cursor)
        .ok_or_else(|| parse_err(0, "missing counts line"))?;
    let counts: Vec<usize> = counts_text
        .split_whitespace()
        .map(|s| {
            s.parse::<usize>()
                .map_err(|_| parse_err(*counts_line, format!("bad count {s:?}")))
        })
        .collect::<Result<_>>()?;
    if counts.len() < 2 {
        return Err(parse_err(*counts_line, "counts line needs vertices and faces"));
    }
    let (nv, nf) = (counts[0], counts[1]);
    cursor += 1;

    let mut vertices = Vec::with_capacity(nv);
    for k in 0..nv {
        let (line_no, text) = lines
            .get(cursor + k)
            .ok_or_else(|| parse_err(0, format!("expected {nv} vertices, file ended at {k}")))?;
        let nums: Vec<f64> = text
            .split_whitespace()
            .take(3)
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|_| parse_err(*line_no, format!("bad coordinate {s:?}")))
            })
            .collect::<Result<_>>()?;
        if nums.len() != 3 {
            return Err(parse_err(*line_no, "vertex needs 3 coordinates"));
        }
        vertices.push(Vec3::new(nums[0], nums[1], nums[2]));
    }
    cursor += nv;

    let mut faces = Vec::with_capacity(nf);
    for k in 0..nf {
        let (line_no, text) = lines
            .get(cursor + k)
            .ok_or_else(|| parse_err(0, format!("expected {nf} faces, file ended at {k}")))?;
        let nums: Vec<usize> = text
            .split_whitespace()
            .map(|s| {
                s.parse::<usize>()
                    .map_err(|_| parse_err(*line_no, format!("bad face field {s:?}")))
            })
            .collect::<Result<_>>()?;
        if nums.is_empty() || nums.len() < nums[0] + 1 || nums[0] < 3 {
            return Err(parse_err(*line_no, "malformed polygon line"));
        }
        let corners = &nums[1..nums[0] + 1];
        for &c in corners {
            if c >= nv {
                return Err(parse_err(*line_no, format!("index {c} exceeds {nv} vertices")));
            }
        }
        for i in 1..corners.len() - 1 {
            faces.push([corners[0], corners[i], corners[i + 1]]);
        }
    }

    TriangleMesh::new(vertices, faces).map_err(|e| parse_err(0, e.to_string()))
}

pub fn write_off(mesh: &TriangleMesh) -> String {
    let mut out = String::from("OFF\n");
    out.push_str(&format!("{} {} 0\n", mesh.num_vertices(), mesh.num_faces()));
    for v in mesh.vertices() {
        out.push_str(&format!("{:.16e} {:.16e} {:.16e}\n", v.x, v.y, v.z));
    }
    for f in mesh.faces() {
        out.push_str(&format!("3 {} {} {}\n", f[0], f[1], f[2]));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;

    #[test]
    fn minimal_off() {
        let mesh = parse_off("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n").unwrap();
        assert_eq!(mesh.num_vertices(), 3);
        assert_eq!(mesh.faces(), &[[0, 1, 2]]);
    }

    #[test]
    fn quad_is_fanned() {
        let mesh =
            parse_off("OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n").unwrap();
        assert_eq!(mesh.faces(), &[[0, 1, 2], [0, 2, 3]]);
    }

    #[test]
    fn round_trip() {
        let mesh = shapes::icosphere(crate::math::Vec3::ZERO, 1.3, 2);
        let back = parse_off(&write_off(&mesh)).unwrap();
        assert_eq!(mesh.vertices(), back.vertices());
        assert_eq!(mesh.faces(), back.faces());
    }

    #[test]
    fn bad_index_is_error() {
        assert!(parse_off("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 9\n").is_err());
    }
}
