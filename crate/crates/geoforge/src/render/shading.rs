//! Per-pixel shading models.

use crate::math::Vec3;

use super::light::{Light, LightKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shader {
    /// Pass the interpolated albedo through unchanged.
    Unlit,
    /// Diffuse: `albedo * (ambient + sum max(0, n.l) * light color)`.
    Lambertian,
    /// Lambertian plus a specular lobe per directional light.
    Phong,
    /// Grayscale `max(0, n.l)`, ignoring albedo.
    Cosine,
}

/// Evaluate the shading model. `normal`, `view` and the light directions
/// must share one frame (camera space here) and be unit length.
pub fn shade(shader: Shader, normal: Vec3, view: Vec3, lights: &[Light], albedo: Vec3) -> Vec3 {
    match shader {
        Shader::Unlit => albedo,
        Shader::Lambertian => albedo.mul_elem(diffuse_factor(normal, lights)),
        Shader::Phong => {
            let mut out = albedo.mul_elem(diffuse_factor(normal, lights));
            for light in lights {
                if light.kind != LightKind::Directional {
                    continue;
                }
                let l = light.direction;
                // Reflection of the incoming ray -l about the normal.
                let r = v_reflect(l, normal);
                let spec = r.dot(view).max(0.0).powf(light.shininess);
                out += light.specular_color * spec;
            }
            out
        }
        Shader::Cosine => {
            let mut gray = 0.0;
            for light in lights {
                if light.kind == LightKind::Directional {
                    gray += normal.dot(light.direction).max(0.0);
                }
            }
            Vec3::splat(gray)
        }
    }
}

/// `ambient + sum over directional lights of color * max(0, n.l)`.
pub fn diffuse_factor(normal: Vec3, lights: &[Light]) -> Vec3 {
    let mut f = Vec3::ZERO;
    for light in lights {
        match light.kind {
            LightKind::Ambient => f += light.color,
            LightKind::Directional => {
                f += light.color * normal.dot(light.direction).max(0.0);
            }
        }
    }
    f
}

/// Gradient of `diffuse_factor` with respect to the normal, contracted with
/// a per-channel cotangent.
pub fn diffuse_factor_normal_vjp(normal: Vec3, lights: &[Light], g_factor: Vec3) -> Vec3 {
    let mut g_n = Vec3::ZERO;
    for light in lights {
        if light.kind != LightKind::Directional {
            continue;
        }
        if normal.dot(light.direction) > 0.0 {
            g_n += light.direction * g_factor.dot(light.color);
        }
    }
    g_n
}

fn v_reflect(l: Vec3, n: Vec3) -> Vec3 {
    n * (2.0 * n.dot(l)) - l
}
