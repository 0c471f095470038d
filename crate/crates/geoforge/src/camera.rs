//! Cameras: rigid extrinsics plus pinhole or orthographic intrinsics, with
//! 3D-2D projection and 2D-3D backprojection.
//!
//! Image convention: pixel (0, 0) is top-left and pixel centers sit at
//! half-integer coordinates, so a W x H image spans `[0, W] x [0, H]` in
//! continuous pixel coordinates.

use crate::depth::DepthMap;
use crate::error::{GeoError, Result};
use crate::math::Vec3;
use crate::pointcloud::PointCloud;
use crate::transform::RigidTransform;

/// Minimum camera-space depth for a pinhole projection to be valid.
pub const NEAR_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Intrinsics {
    /// Perspective pinhole: `u = fx x / z + cx`, `v = fy y / z + cy`.
    Pinhole { fx: f64, fy: f64, cx: f64, cy: f64 },
    /// Orthographic: `u = x / scale_x + cx`, `v = y / scale_y + cy`,
    /// with scales in world units per pixel.
    Orthographic {
        scale_x: f64,
        scale_y: f64,
        cx: f64,
        cy: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Camera {
    /// World-to-camera transform.
    extrinsics: RigidTransform,
    intrinsics: Intrinsics,
    image_size: (usize, usize),
}

/// One projected point: continuous pixel coordinates plus camera-space depth.
/// `valid` is false for pinhole points at or behind the camera plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectedPoint {
    pub u: f64,
    pub v: f64,
    pub depth: f64,
    pub valid: bool,
}

impl Camera {
    pub fn new(
        extrinsics: RigidTransform,
        intrinsics: Intrinsics,
        image_size: (usize, usize),
    ) -> Result<Camera> {
        match intrinsics {
            Intrinsics::Pinhole { fx, fy, .. } => {
                if fx <= 0.0 || fy <= 0.0 {
                    return Err(GeoError::Domain(format!("focal lengths must be positive: fx={fx} fy={fy}")));
                }
            }
            Intrinsics::Orthographic { scale_x, scale_y, .. } => {
                if scale_x <= 0.0 || scale_y <= 0.0 {
                    return Err(GeoError::Domain(format!(
                        "orthographic scales must be positive: {scale_x} {scale_y}"
                    )));
                }
            }
        }
        if image_size.0 == 0 || image_size.1 == 0 {
            return Err(GeoError::Domain(format!("image size must be positive: {image_size:?}")));
        }
        Ok(Camera {
            extrinsics,
            intrinsics,
            image_size,
        })
    }

    pub fn extrinsics(&self) -> &RigidTransform {
        &self.extrinsics
    }

    pub fn intrinsics(&self) -> &Intrinsics {
        &self.intrinsics
    }

    pub fn image_size(&self) -> (usize, usize) {
        self.image_size
    }

    pub fn is_pinhole(&self) -> bool {
        matches!(self.intrinsics, Intrinsics::Pinhole { .. })
    }

    /// World point to camera space.
    #[inline]
    pub fn to_camera(&self, p: Vec3) -> Vec3 {
        self.extrinsics.apply(p)
    }

    /// Project a camera-space point to (u, v, depth).
    #[inline]
    pub fn project_camera_point(&self, p: Vec3) -> ProjectedPoint {
        match self.intrinsics {
            Intrinsics::Pinhole { fx, fy, cx, cy } => {
                if p.z <= NEAR_EPSILON {
                    ProjectedPoint {
                        u: 0.0,
                        v: 0.0,
                        depth: p.z,
                        valid: false,
                    }
                } else {
                    ProjectedPoint {
                        u: fx * p.x / p.z + cx,
                        v: fy * p.y / p.z + cy,
                        depth: p.z,
                        valid: true,
                    }
                }
            }
            Intrinsics::Orthographic {
                scale_x,
                scale_y,
                cx,
                cy,
            } => ProjectedPoint {
                u: p.x / scale_x + cx,
                v: p.y / scale_y + cy,
                depth: p.z,
                valid: true,
            },
        }
    }

    /// Invert the projection at continuous pixel coordinates and depth,
    /// returning a camera-space point.
    #[inline]
    pub fn unproject_to_camera(&self, u: f64, v: f64, depth: f64) -> Vec3 {
        match self.intrinsics {
            Intrinsics::Pinhole { fx, fy, cx, cy } => {
                Vec3::new((u - cx) * depth / fx, (v - cy) * depth / fy, depth)
            }
            Intrinsics::Orthographic {
                scale_x,
                scale_y,
                cx,
                cy,
            } => Vec3::new((u - cx) * scale_x, (v - cy) * scale_y, depth),
        }
    }
}

/// Project world points through a camera.
pub fn project_points(camera: &Camera, points: &[Vec3]) -> Vec<ProjectedPoint> {
    points
        .iter()
        .map(|&p| camera.project_camera_point(camera.to_camera(p)))
        .collect()
}

/// Lift every non-sentinel depth pixel back to a world-space point,
/// inverting `project_points` at pixel centers.
pub fn backproject_depth(depth_map: &DepthMap) -> PointCloud {
    let camera = depth_map.camera();
    let cam_to_world = camera.extrinsics().inverse();
    let mut points = Vec::new();
    for py in 0..depth_map.height() {
        for px in 0..depth_map.width() {
            let d = depth_map.get(px, py);
            if !DepthMap::is_hit(d) {
                continue;
            }
            let cam_point = camera.unproject_to_camera(px as f64 + 0.5, py as f64 + 0.5, d);
            points.push(cam_to_world.apply(cam_point));
        }
    }
    PointCloud::new(points).expect("backprojected points are finite")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;
    use crate::transform::exp_so3;

    fn pinhole(fx: f64, fy: f64, cx: f64, cy: f64) -> Camera {
        Camera::new(
            RigidTransform::IDENTITY,
            Intrinsics::Pinhole { fx, fy, cx, cy },
            (64, 64),
        )
        .unwrap()
    }

    #[test]
    fn unit_pinhole_center_point() {
        let cam = pinhole(1.0, 1.0, 0.0, 0.0);
        let p = project_points(&cam, &[Vec3::new(0.0, 0.0, 1.0)]);
        assert!(p[0].valid);
        assert_eq!((p[0].u, p[0].v, p[0].depth), (0.0, 0.0, 1.0));
    }

    #[test]
    fn pinhole_u_formula() {
        let cam = pinhole(100.0, 100.0, 50.0, 50.0);
        let p = project_points(&cam, &[Vec3::new(2.0, 0.0, 2.0)]);
        assert!((p[0].u - 150.0).abs() < 1e-12);
    }

    #[test]
    fn behind_camera_flagged_invalid() {
        let cam = pinhole(100.0, 100.0, 50.0, 50.0);
        let p = project_points(&cam, &[Vec3::new(0.0, 0.0, -1.0), Vec3::new(0.0, 0.0, 1e-12)]);
        assert!(!p[0].valid);
        assert!(!p[1].valid);
    }

    #[test]
    fn project_backproject_round_trip() {
        let extr = RigidTransform::new(exp_so3(Vec3::new(0.2, -0.4, 0.1)), Vec3::new(0.3, -0.2, 4.0)).unwrap();
        for intr in [
            Intrinsics::Pinhole {
                fx: 80.0,
                fy: 90.0,
                cx: 32.0,
                cy: 30.0,
            },
            Intrinsics::Orthographic {
                scale_x: 0.05,
                scale_y: 0.04,
                cx: 32.0,
                cy: 32.0,
            },
        ] {
            let cam = Camera::new(extr, intr, (64, 64)).unwrap();
            let inv = cam.extrinsics().inverse();
            let mut rng = Rng::new(77);
            for _ in 0..100 {
                let world = Vec3::new(rng.range(-1.0, 1.0), rng.range(-1.0, 1.0), rng.range(-1.0, 1.0));
                let proj = cam.project_camera_point(cam.to_camera(world));
                assert!(proj.valid);
                let back = inv.apply(cam.unproject_to_camera(proj.u, proj.v, proj.depth));
                assert!((back - world).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn backproject_constant_depth_plane() {
        let cam = Camera::new(
            RigidTransform::IDENTITY,
            Intrinsics::Pinhole {
                fx: 32.0,
                fy: 32.0,
                cx: 8.0,
                cy: 8.0,
            },
            (16, 16),
        )
        .unwrap();
        let dm = DepthMap::new(16, 16, vec![2.5; 256], cam).unwrap();
        let cloud = backproject_depth(&dm);
        assert_eq!(cloud.len(), 256);
        for p in cloud.points() {
            assert!((p.z - 2.5).abs() < 1e-12);
        }
    }

    #[test]
    fn backproject_all_sentinel_is_empty() {
        let cam = pinhole(10.0, 10.0, 5.0, 5.0);
        let dm = DepthMap::new(64, 64, vec![DepthMap::NO_HIT; 64 * 64], cam).unwrap();
        assert!(backproject_depth(&dm).is_empty());
    }
}
