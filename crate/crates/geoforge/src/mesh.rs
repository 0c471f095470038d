//! Indexed triangle meshes, the hub representation of the conversion graph.

use crate::error::{GeoError, Result};
use crate::math::{Aabb, Vec3};

/// An indexed triangle set with optional per-vertex attributes.
///
/// Immutable after construction; all operations that "modify" a mesh return
/// a new one, so meshes can be shared freely across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    vertices: Vec<Vec3>,
    faces: Vec<[usize; 3]>,
    vertex_colors: Option<Vec<Vec3>>,
    vertex_normals: Option<Vec<Vec3>>,
}

impl TriangleMesh {
    /// Build a mesh, validating that all coordinates are finite and every
    /// face index is in range.
    pub fn new(vertices: Vec<Vec3>, faces: Vec<[usize; 3]>) -> Result<TriangleMesh> {
        let n = vertices.len();
        for (i, v) in vertices.iter().enumerate() {
            if !v.is_finite() {
                return Err(GeoError::Domain(format!("vertex {i} is not finite: {v:?}")));
            }
        }
        for (i, f) in faces.iter().enumerate() {
            for &idx in f {
                if idx >= n {
                    return Err(GeoError::Domain(format!(
                        "face {i} references vertex {idx}, but the mesh has {n} vertices"
                    )));
                }
            }
        }
        Ok(TriangleMesh {
            vertices,
            faces,
            vertex_colors: None,
            vertex_normals: None,
        })
    }

    /// Attach per-vertex colors in `[0, 1]`; the array length must equal the
    /// vertex count.
    pub fn with_vertex_colors(mut self, colors: Vec<Vec3>) -> Result<TriangleMesh> {
        if colors.len() != self.vertices.len() {
            return Err(GeoError::Domain(format!(
                "{} colors for {} vertices",
                colors.len(),
                self.vertices.len()
            )));
        }
        for (i, c) in colors.iter().enumerate() {
            if !c.is_finite() || c.x < 0.0 || c.x > 1.0 || c.y < 0.0 || c.y > 1.0 || c.z < 0.0 || c.z > 1.0 {
                return Err(GeoError::Domain(format!("color {i} outside [0,1]: {c:?}")));
            }
        }
        self.vertex_colors = Some(colors);
        Ok(self)
    }

    /// Attach per-vertex unit normals; length must equal the vertex count.
    pub fn with_vertex_normals(mut self, normals: Vec<Vec3>) -> Result<TriangleMesh> {
        if normals.len() != self.vertices.len() {
            return Err(GeoError::Domain(format!(
                "{} normals for {} vertices",
                normals.len(),
                self.vertices.len()
            )));
        }
        for (i, nrm) in normals.iter().enumerate() {
            if !nrm.is_finite() || (nrm.norm() - 1.0).abs() > 1e-6 {
                return Err(GeoError::Domain(format!("normal {i} is not unit length: {nrm:?}")));
            }
        }
        self.vertex_normals = Some(normals);
        Ok(self)
    }

    /// Replace the vertex positions, keeping faces and attributes.
    pub fn with_vertices(&self, vertices: Vec<Vec3>) -> Result<TriangleMesh> {
        if vertices.len() != self.vertices.len() {
            return Err(GeoError::Domain(format!(
                "expected {} vertices, got {}",
                self.vertices.len(),
                vertices.len()
            )));
        }
        let mut m = TriangleMesh::new(vertices, self.faces.clone())?;
        m.vertex_colors = self.vertex_colors.clone();
        m.vertex_normals = self.vertex_normals.clone();
        Ok(m)
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn vertex_colors(&self) -> Option<&[Vec3]> {
        self.vertex_colors.as_deref()
    }

    pub fn vertex_normals(&self) -> Option<&[Vec3]> {
        self.vertex_normals.as_deref()
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    /// The three corner positions of face `f`.
    #[inline]
    pub fn triangle(&self, f: usize) -> [Vec3; 3] {
        let [a, b, c] = self.faces[f];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    /// Twice the area vector (un-normalized normal) of face `f`.
    #[inline]
    pub fn face_area_vector(&self, f: usize) -> Vec3 {
        let [a, b, c] = self.triangle(f);
        (b - a).cross(c - a)
    }

    pub fn face_area(&self, f: usize) -> f64 {
        0.5 * self.face_area_vector(f).norm()
    }

    pub fn total_area(&self) -> f64 {
        (0..self.faces.len()).map(|f| self.face_area(f)).sum()
    }

    pub fn bounding_box(&self) -> Aabb {
        Aabb::from_points(self.vertices.iter().copied())
    }
}
