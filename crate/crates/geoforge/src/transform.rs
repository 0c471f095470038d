//! Rigid-body transforms and rotation parameterizations: Euler angles,
//! quaternions, and the SO(3) exponential/logarithm maps.

use crate::error::{GeoError, Result};
use crate::math::{Mat3, Vec3};
use crate::pointcloud::PointCloud;

/// Axis order for intrinsic Euler-angle composition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EulerConvention {
    /// Intrinsic x, then y', then z'': `R = Rx(a) Ry(b) Rz(c)`.
    Xyz,
    /// Intrinsic z, then y', then x'': `R = Rz(a) Ry(b) Rx(c)`.
    Zyx,
}

impl EulerConvention {
    /// Parse a convention tag; unknown tags are a configuration error.
    pub fn parse(tag: &str) -> Result<EulerConvention> {
        match tag.to_ascii_uppercase().as_str() {
            "XYZ" => Ok(EulerConvention::Xyz),
            "ZYX" => Ok(EulerConvention::Zyx),
            other => Err(GeoError::Config(format!(
                "unknown Euler convention {other:?} (expected XYZ or ZYX)"
            ))),
        }
    }
}

fn rot_x(a: f64) -> Mat3 {
    let (s, c) = a.sin_cos();
    Mat3::from_rows([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])
}

fn rot_y(a: f64) -> Mat3 {
    let (s, c) = a.sin_cos();
    Mat3::from_rows([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])
}

fn rot_z(a: f64) -> Mat3 {
    let (s, c) = a.sin_cos();
    Mat3::from_rows([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
}

/// Rotation matrix from three Euler angles (radians) under the given
/// intrinsic convention.
pub fn euler_to_rotation(angles: Vec3, convention: EulerConvention) -> Result<Mat3> {
    if !angles.is_finite() {
        return Err(GeoError::Domain(format!("non-finite Euler angles: {angles:?}")));
    }
    Ok(match convention {
        EulerConvention::Xyz => rot_x(angles.x) * rot_y(angles.y) * rot_z(angles.z),
        EulerConvention::Zyx => rot_z(angles.x) * rot_y(angles.y) * rot_x(angles.z),
    })
}

/// Euler angles re-encoding the rotation under the given convention.
///
/// The angles are one valid decomposition (gimbal-locked inputs pin the
/// third angle to zero); `euler_to_rotation` of the result reproduces the
/// matrix.
pub fn rotation_to_euler(rotation: &Mat3, convention: EulerConvention) -> Vec3 {
    let m = &rotation.rows;
    match convention {
        EulerConvention::Xyz => {
            // R = Rx(a) Ry(b) Rz(c): R02 = sin b.
            let sb = m[0][2].clamp(-1.0, 1.0);
            let b = sb.asin();
            if sb.abs() < 1.0 - 1e-12 {
                let a = (-m[1][2]).atan2(m[2][2]);
                let c = (-m[0][1]).atan2(m[0][0]);
                Vec3::new(a, b, c)
            } else {
                // Gimbal lock: only a +/- c is determined; set c = 0.
                let a = m[2][1].atan2(m[1][1]);
                Vec3::new(a, b, 0.0)
            }
        }
        EulerConvention::Zyx => {
            // R = Rz(a) Ry(b) Rx(c): R20 = -sin b.
            let sb = (-m[2][0]).clamp(-1.0, 1.0);
            let b = sb.asin();
            if sb.abs() < 1.0 - 1e-12 {
                let a = m[1][0].atan2(m[0][0]);
                let c = m[2][1].atan2(m[2][2]);
                Vec3::new(a, b, c)
            } else {
                let a = (-m[0][1]).atan2(m[1][1]);
                Vec3::new(a, b, 0.0)
            }
        }
    }
}

/// Rotation matrix from a quaternion `(w, x, y, z)`; normalized internally.
/// `q` and `-q` produce the identical matrix.
pub fn quaternion_to_rotation(q: [f64; 4]) -> Result<Mat3> {
    let n = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]).sqrt();
    if !(n > 1e-12) {
        return Err(GeoError::Domain(format!("near-zero quaternion: {q:?}")));
    }
    let w = q[0] / n;
    let x = q[1] / n;
    let y = q[2] / n;
    let z = q[3] / n;
    let (xx, yy, zz) = (x * x, y * y, z * z);
    let (xy, xz, yz) = (x * y, x * z, y * z);
    let (wx, wy, wz) = (w * x, w * y, w * z);
    Ok(Mat3::from_rows([
        [1.0 - 2.0 * (yy + zz), 2.0 * (xy - wz), 2.0 * (xz + wy)],
        [2.0 * (xy + wz), 1.0 - 2.0 * (xx + zz), 2.0 * (yz - wx)],
        [2.0 * (xz - wy), 2.0 * (yz + wx), 1.0 - 2.0 * (xx + yy)],
    ]))
}

/// Unit quaternion `(w, x, y, z)` with `w >= 0` encoding the rotation.
/// Shoemake's branch selection keeps the conversion stable for all inputs.
pub fn rotation_to_quaternion(rotation: &Mat3) -> [f64; 4] {
    let m = &rotation.rows;
    let trace = m[0][0] + m[1][1] + m[2][2];
    let q = if trace > 0.0 {
        let s = (trace + 1.0).sqrt();
        let w = 0.5 * s;
        let f = 0.5 / s;
        [
            w,
            f * (m[2][1] - m[1][2]),
            f * (m[0][2] - m[2][0]),
            f * (m[1][0] - m[0][1]),
        ]
    } else {
        let mut i = 0;
        if m[1][1] > m[0][0] {
            i = 1;
        }
        if m[2][2] > m[i][i] {
            i = 2;
        }
        let j = (i + 1) % 3;
        let k = (j + 1) % 3;
        let s = (m[i][i] - m[j][j] - m[k][k] + 1.0).sqrt();
        let mut q = [0.0; 4];
        q[i + 1] = 0.5 * s;
        let f = 0.5 / s;
        q[0] = f * (m[k][j] - m[j][k]);
        q[j + 1] = f * (m[j][i] + m[i][j]);
        q[k + 1] = f * (m[k][i] + m[i][k]);
        q
    };
    if q[0] < 0.0 {
        [-q[0], -q[1], -q[2], -q[3]]
    } else {
        q
    }
}

/// SO(3) exponential map (Rodrigues), with a Taylor branch below `1e-6`.
pub fn exp_so3(axis_angle: Vec3) -> Mat3 {
    let theta2 = axis_angle.norm_squared();
    let theta = theta2.sqrt();
    let (a, b) = if theta < 1e-6 {
        // sin(t)/t and (1-cos t)/t^2 expanded to fourth order.
        (
            1.0 - theta2 / 6.0 + theta2 * theta2 / 120.0,
            0.5 - theta2 / 24.0 + theta2 * theta2 / 720.0,
        )
    } else {
        (theta.sin() / theta, (1.0 - theta.cos()) / theta2)
    };
    let k = Mat3::skew(axis_angle);
    Mat3::IDENTITY + k * a + (k * k) * b
}

/// SO(3) logarithm: the axis-angle vector with angle in `[0, pi]`.
///
/// Computed through the quaternion for stability near `pi`; exact inverse of
/// `exp_so3` for angles below `pi - 1e-6`.
pub fn log_so3(rotation: &Mat3) -> Vec3 {
    let q = rotation_to_quaternion(rotation);
    let v = Vec3::new(q[1], q[2], q[3]);
    let n = v.norm();
    let w = q[0];
    if n < 1e-9 {
        // theta/sin(theta/2) ~ 2/w near identity.
        v * (2.0 / w.max(1e-12))
    } else {
        let theta = 2.0 * n.atan2(w);
        v * (theta / n)
    }
}

/// A rotation plus translation, applied as `p' = R p + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform {
    rotation: Mat3,
    translation: Vec3,
}

impl RigidTransform {
    pub const IDENTITY: RigidTransform = RigidTransform {
        rotation: Mat3::IDENTITY,
        translation: Vec3::ZERO,
    };

    /// Validates orthonormality (`R^T R = I` within 1e-9) and `det R = +1`.
    pub fn new(rotation: Mat3, translation: Vec3) -> Result<RigidTransform> {
        let err = (rotation.transpose() * rotation).max_abs_diff(&Mat3::IDENTITY);
        if err > 1e-9 {
            return Err(GeoError::Domain(format!(
                "rotation is not orthonormal (max |R^T R - I| = {err:.3e})"
            )));
        }
        let det = rotation.determinant();
        if (det - 1.0).abs() > 1e-9 {
            return Err(GeoError::Domain(format!("rotation determinant {det} is not +1")));
        }
        if !translation.is_finite() {
            return Err(GeoError::Domain("non-finite translation".into()));
        }
        Ok(RigidTransform { rotation, translation })
    }

    pub fn from_translation(translation: Vec3) -> RigidTransform {
        RigidTransform {
            rotation: Mat3::IDENTITY,
            translation,
        }
    }

    pub fn rotation(&self) -> &Mat3 {
        &self.rotation
    }

    pub fn translation(&self) -> Vec3 {
        self.translation
    }

    #[inline]
    pub fn apply(&self, p: Vec3) -> Vec3 {
        self.rotation * p + self.translation
    }

    /// Rotate a direction (no translation).
    #[inline]
    pub fn apply_vector(&self, v: Vec3) -> Vec3 {
        self.rotation * v
    }

    pub fn inverse(&self) -> RigidTransform {
        let rt = self.rotation.transpose();
        RigidTransform {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    /// Composition: `(self ∘ other)(p) = self(other(p))`.
    pub fn compose(&self, other: &RigidTransform) -> RigidTransform {
        RigidTransform {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }
}

/// Apply a rigid transform to every point of a cloud. Normals rotate,
/// colors pass through.
pub fn transform_points(transform: &RigidTransform, cloud: &PointCloud) -> PointCloud {
    let points: Vec<Vec3> = cloud.points().iter().map(|&p| transform.apply(p)).collect();
    let mut out = PointCloud::new(points).expect("rigid motion of finite points stays finite");
    if let Some(normals) = cloud.normals() {
        let rotated: Vec<Vec3> = normals.iter().map(|&n| transform.apply_vector(n)).collect();
        out = out.with_normals(rotated).unwrap();
    }
    if let Some(colors) = cloud.colors() {
        out = out.with_colors(colors.to_vec()).unwrap();
    }
    out
}

/// Apply a general 4x4 homogeneous transform (row-major) with perspective
/// division. Points mapped to `|w| <= 1e-12` are a domain error.
pub fn apply_homogeneous(matrix: &[[f64; 4]; 4], cloud: &PointCloud) -> Result<PointCloud> {
    let mut points = Vec::with_capacity(cloud.len());
    for (i, p) in cloud.points().iter().enumerate() {
        let h = [p.x, p.y, p.z, 1.0];
        let mut out = [0.0; 4];
        for (r, row) in matrix.iter().enumerate() {
            out[r] = row.iter().zip(h.iter()).map(|(a, b)| a * b).sum();
        }
        if out[3].abs() <= 1e-12 {
            return Err(GeoError::Domain(format!("point {i} maps to w = {} under the homogeneous transform", out[3])));
        }
        points.push(Vec3::new(out[0] / out[3], out[1] / out[3], out[2] / out[3]));
    }
    PointCloud::new(points)
}
