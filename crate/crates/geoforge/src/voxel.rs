//! Axis-aligned scalar grids: occupancy, signed distance, and orthographic
//! depth maps.

use crate::error::{GeoError, Result};
use crate::math::{Aabb, Vec3};

/// Placement of a uniform grid in world space.
///
/// The canonical fit pads the bounding box by half a voxel on every side, so
/// `resolution` cells of size `voxel_size` along the longest axis cover
/// `max_extent + voxel_size`. One convention everywhere keeps the conversion
/// round trips consistent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub resolution: (usize, usize, usize),
    pub origin: Vec3,
    pub voxel_size: f64,
}

impl GridSpec {
    /// Fit a grid around `bounds` so the grid box equals the bounds padded by
    /// half a voxel on each side.
    pub fn fit(bounds: &Aabb, resolution: (usize, usize, usize)) -> Result<GridSpec> {
        let (rx, ry, rz) = resolution;
        if rx == 0 || ry == 0 || rz == 0 {
            return Err(GeoError::Domain(format!("resolution must be positive, got {resolution:?}")));
        }
        if bounds.is_empty() {
            return Err(GeoError::Domain("cannot fit a grid around an empty bounding box".into()));
        }
        let max_res = rx.max(ry).max(rz);
        let max_extent = bounds.extent().max_component();
        let voxel_size = if max_res > 1 && max_extent > 0.0 {
            max_extent / (max_res - 1) as f64
        } else if max_extent > 0.0 {
            max_extent
        } else {
            1.0
        };
        Ok(GridSpec {
            resolution,
            origin: bounds.min - Vec3::splat(voxel_size * 0.5),
            voxel_size,
        })
    }

    pub fn num_cells(&self) -> usize {
        self.resolution.0 * self.resolution.1 * self.resolution.2
    }

    /// Linear index with x fastest.
    #[inline]
    pub fn linear(&self, x: usize, y: usize, z: usize) -> usize {
        debug_assert!(x < self.resolution.0 && y < self.resolution.1 && z < self.resolution.2);
        x + self.resolution.0 * (y + self.resolution.1 * z)
    }

    /// World position of the center of cell `(x, y, z)`.
    #[inline]
    pub fn cell_center(&self, x: usize, y: usize, z: usize) -> Vec3 {
        self.origin
            + Vec3::new(
                (x as f64 + 0.5) * self.voxel_size,
                (y as f64 + 0.5) * self.voxel_size,
                (z as f64 + 0.5) * self.voxel_size,
            )
    }

    /// Cell containing the world point, clamped onto the grid.
    pub fn cell_of(&self, p: Vec3) -> (usize, usize, usize) {
        let q = (p - self.origin) / self.voxel_size;
        let clamp = |v: f64, r: usize| -> usize {
            if v < 0.0 {
                0
            } else {
                (v.floor() as usize).min(r - 1)
            }
        };
        (
            clamp(q.x, self.resolution.0),
            clamp(q.y, self.resolution.1),
            clamp(q.z, self.resolution.2),
        )
    }

    /// The world-space box of cell `(x, y, z)`.
    pub fn cell_box(&self, x: usize, y: usize, z: usize) -> Aabb {
        let lo = self.origin
            + Vec3::new(
                x as f64 * self.voxel_size,
                y as f64 * self.voxel_size,
                z as f64 * self.voxel_size,
            );
        Aabb {
            min: lo,
            max: lo + Vec3::splat(self.voxel_size),
        }
    }

    /// The world-space box of the whole grid.
    pub fn grid_box(&self) -> Aabb {
        Aabb {
            min: self.origin,
            max: self.origin
                + Vec3::new(
                    self.resolution.0 as f64 * self.voxel_size,
                    self.resolution.1 as f64 * self.voxel_size,
                    self.resolution.2 as f64 * self.voxel_size,
                ),
        }
    }
}

/// Occupancy grid with values in `[0, 1]`, x-fastest storage.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelGrid {
    spec: GridSpec,
    values: Vec<f64>,
}

impl VoxelGrid {
    pub fn new(spec: GridSpec, values: Vec<f64>) -> Result<VoxelGrid> {
        if values.len() != spec.num_cells() {
            return Err(GeoError::Domain(format!(
                "{} values for a {:?} grid ({} cells)",
                values.len(),
                spec.resolution,
                spec.num_cells()
            )));
        }
        if spec.voxel_size <= 0.0 {
            return Err(GeoError::Domain("voxel_size must be positive".into()));
        }
        for (i, &v) in values.iter().enumerate() {
            if !(0.0..=1.0).contains(&v) {
                return Err(GeoError::Domain(format!("occupancy value {v} at cell {i} outside [0,1]")));
            }
        }
        Ok(VoxelGrid { spec, values })
    }

    pub fn zeros(spec: GridSpec) -> VoxelGrid {
        VoxelGrid {
            values: vec![0.0; spec.num_cells()],
            spec,
        }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn resolution(&self) -> (usize, usize, usize) {
        self.spec.resolution
    }

    pub fn origin(&self) -> Vec3 {
        self.spec.origin
    }

    pub fn voxel_size(&self) -> f64 {
        self.spec.voxel_size
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize) -> f64 {
        self.values[self.spec.linear(x, y, z)]
    }

    pub fn occupied(&self, x: usize, y: usize, z: usize, threshold: f64) -> bool {
        self.get(x, y, z) >= threshold
    }

    pub fn count_occupied(&self, threshold: f64) -> usize {
        self.values.iter().filter(|&&v| v >= threshold).count()
    }

    pub(crate) fn set(&mut self, x: usize, y: usize, z: usize, v: f64) {
        let i = self.spec.linear(x, y, z);
        self.values[i] = v;
    }
}

/// Signed distance samples at cell centers, negative inside.
#[derive(Debug, Clone, PartialEq)]
pub struct SdfGrid {
    spec: GridSpec,
    values: Vec<f64>,
}

impl SdfGrid {
    pub fn new(spec: GridSpec, values: Vec<f64>) -> Result<SdfGrid> {
        if values.len() != spec.num_cells() {
            return Err(GeoError::Domain(format!(
                "{} values for a {:?} grid ({} cells)",
                values.len(),
                spec.resolution,
                spec.num_cells()
            )));
        }
        if spec.voxel_size <= 0.0 {
            return Err(GeoError::Domain("voxel_size must be positive".into()));
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(GeoError::Domain(format!("non-finite distance {v} at cell {i}")));
        }
        Ok(SdfGrid { spec, values })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn resolution(&self) -> (usize, usize, usize) {
        self.spec.resolution
    }

    pub fn origin(&self) -> Vec3 {
        self.spec.origin
    }

    pub fn voxel_size(&self) -> f64 {
        self.spec.voxel_size
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize) -> f64 {
        self.values[self.spec.linear(x, y, z)]
    }

    /// Trilinear interpolation of the field at a world point. The point is
    /// clamped onto the lattice of cell centers.
    pub fn sample_trilinear(&self, p: Vec3) -> f64 {
        let (rx, ry, rz) = self.spec.resolution;
        let q = (p - self.spec.origin) / self.spec.voxel_size - Vec3::splat(0.5);
        let clampf = |v: f64, r: usize| v.max(0.0).min((r - 1) as f64);
        let qx = clampf(q.x, rx);
        let qy = clampf(q.y, ry);
        let qz = clampf(q.z, rz);
        let x0 = (qx.floor() as usize).min(rx - 1);
        let y0 = (qy.floor() as usize).min(ry - 1);
        let z0 = (qz.floor() as usize).min(rz - 1);
        let x1 = (x0 + 1).min(rx - 1);
        let y1 = (y0 + 1).min(ry - 1);
        let z1 = (z0 + 1).min(rz - 1);
        let fx = qx - x0 as f64;
        let fy = qy - y0 as f64;
        let fz = qz - z0 as f64;
        let lerp = |a: f64, b: f64, t: f64| a + (b - a) * t;
        let c00 = lerp(self.get(x0, y0, z0), self.get(x1, y0, z0), fx);
        let c10 = lerp(self.get(x0, y1, z0), self.get(x1, y1, z0), fx);
        let c01 = lerp(self.get(x0, y0, z1), self.get(x1, y0, z1), fx);
        let c11 = lerp(self.get(x0, y1, z1), self.get(x1, y1, z1), fx);
        lerp(lerp(c00, c10, fy), lerp(c01, c11, fy), fz)
    }
}

/// The grid axis an ODM looks along.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    /// The two cross axes `(u, v)` of this viewing axis, in a fixed order.
    pub fn cross_axes(self) -> (usize, usize) {
        match self {
            Axis::X => (1, 2),
            Axis::Y => (0, 2),
            Axis::Z => (0, 1),
        }
    }
}

/// Travel direction of ODM rays along their axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Positive,
    Negative,
}

/// Orthographic depth map: per (u, v) ray, the cell count from the entry
/// face to the first occupied cell, or `extent` when the ray exits unhit.
#[derive(Debug, Clone, PartialEq)]
pub struct Odm {
    pub axis: Axis,
    pub direction: Sign,
    /// (R_u, R_v) across the two cross axes.
    pub resolution: (usize, usize),
    /// Grid extent R_w along `axis`.
    pub extent: usize,
    depths: Vec<usize>,
}

impl Odm {
    pub fn new(
        axis: Axis,
        direction: Sign,
        resolution: (usize, usize),
        extent: usize,
        depths: Vec<usize>,
    ) -> Result<Odm> {
        if depths.len() != resolution.0 * resolution.1 {
            return Err(GeoError::Domain(format!(
                "{} depths for a {:?} ODM",
                depths.len(),
                resolution
            )));
        }
        if let Some(&d) = depths.iter().find(|&&d| d > extent) {
            return Err(GeoError::Domain(format!("depth {d} exceeds extent {extent}")));
        }
        Ok(Odm {
            axis,
            direction,
            resolution,
            extent,
            depths,
        })
    }

    pub fn depths(&self) -> &[usize] {
        &self.depths
    }

    #[inline]
    pub fn depth(&self, u: usize, v: usize) -> usize {
        self.depths[u + self.resolution.0 * v]
    }
}
