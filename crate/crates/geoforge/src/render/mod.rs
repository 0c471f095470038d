//! Modular differentiable rendering: fixed stage order
//! transform -> project -> rasterize -> shade, with swappable rasterizer
//! (hard z-buffer, soft aggregation, DIB) and shader (Unlit, Lambertian,
//! Phong, Cosine) stages. The soft and DIB modes carry analytic gradients
//! to vertex positions and colors.

mod dib;
mod hard;
mod light;
pub mod screen;
mod shading;
mod soft;

pub use light::{Light, LightKind};
pub use screen::{project_mesh, ProjectedMesh, RENDER_NEAR};
pub use shading::{shade, Shader};

use crate::camera::{Camera, Intrinsics};
use crate::depth::DepthMap;
use crate::error::{GeoError, Result};
use crate::image::Image;
use crate::math::{Vec2, Vec3};
use crate::mesh::TriangleMesh;

/// Bandwidths of the soft rasterizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SoftSettings {
    /// Distance-to-probability bandwidth, in squared pixels.
    pub sigma: f64,
    /// Depth-aggregation temperature over normalized nearness in [0, 1].
    pub gamma: f64,
    /// Nearness score of the background in the aggregation softmax.
    pub background_eps: f64,
}

impl Default for SoftSettings {
    fn default() -> Self {
        SoftSettings {
            sigma: 0.25,
            gamma: 0.01,
            background_eps: 1e-3,
        }
    }
}

impl SoftSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.gamma > 0.0 && self.background_eps > 0.0) {
            return Err(GeoError::Config(format!("soft settings must be positive: {self:?}")));
        }
        Ok(())
    }
}

/// Rasterization stage selector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rasterizer {
    Hard,
    Soft(SoftSettings),
    Dib { alpha_delta: f64 },
}

/// Albedo source for shading.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Material {
    /// Use the mesh's per-vertex colors (white where absent).
    VertexColors,
    /// One albedo for every vertex.
    Uniform(Vec3),
}

/// The assembled pipeline configuration.
#[derive(Debug, Clone)]
pub struct RenderPipeline {
    pub camera: Camera,
    pub rasterizer: Rasterizer,
    pub shader: Shader,
    pub lights: Vec<Light>,
    pub image_size: (usize, usize),
    pub background: Vec3,
}

impl RenderPipeline {
    pub fn new(
        camera: Camera,
        rasterizer: Rasterizer,
        shader: Shader,
        lights: Vec<Light>,
        background: Vec3,
    ) -> Result<RenderPipeline> {
        let image_size = camera.image_size();
        if image_size.0 == 0 || image_size.1 == 0 {
            return Err(GeoError::Config(format!("image size must be positive: {image_size:?}")));
        }
        if let Rasterizer::Soft(settings) = &rasterizer {
            settings.validate()?;
        }
        if let Rasterizer::Dib { alpha_delta } = rasterizer {
            if !(alpha_delta > 0.0) {
                return Err(GeoError::Config(format!("alpha_delta must be positive, got {alpha_delta}")));
            }
        }
        Ok(RenderPipeline {
            camera,
            rasterizer,
            shader,
            lights,
            image_size,
            background,
        })
    }

    /// Projected vertex set the rasterizer stages consume; exposed so tests
    /// can verify swapping the rasterizer leaves it untouched.
    pub fn project(&self, mesh: &TriangleMesh) -> ProjectedMesh {
        project_mesh(&self.camera, mesh)
    }
}

/// What a render produces.
#[derive(Debug, Clone)]
pub struct RenderOutput {
    pub width: usize,
    pub height: usize,
    /// H x W x 3 color.
    pub color: Image,
    /// H x W coverage / silhouette in [0, 1].
    pub alpha: Vec<f64>,
    /// H x W interpolated camera depth (hard and DIB only).
    pub depth: Option<Vec<f64>>,
    /// H x W owning face per pixel, -1 background (hard and DIB only).
    pub face_ids: Option<Vec<i64>>,
}

impl RenderOutput {
    /// Package the depth buffer as a DepthMap for backprojection.
    pub fn depth_map(&self, camera: &Camera) -> Option<Result<DepthMap>> {
        self.depth
            .as_ref()
            .map(|d| DepthMap::new(self.width, self.height, d.clone(), *camera))
    }
}

/// Gradients returned by `render_vjp`.
#[derive(Debug, Clone)]
pub struct RenderGradients {
    pub positions: Vec<Vec3>,
    pub colors: Vec<Vec3>,
}

/// Everything the rasterizers need about one mesh in one frame.
pub(crate) struct Scene<'a> {
    pub proj: &'a ProjectedMesh,
    pub faces: &'a [[usize; 3]],
    pub albedo: Vec<Vec3>,
    pub vertex_normals_cam: Option<Vec<Vec3>>,
    pub shader: Shader,
    pub lights_cam: Vec<Light>,
    pub background: Vec3,
}

/// Intermediates of one per-pixel-per-face color evaluation, kept for the
/// backward pass.
pub(crate) struct ColorEval {
    pub rho: [f64; 3],
    pub albedo: Vec3,
    pub normal: Vec3,
    pub m_len: f64,
    pub flat: bool,
    pub color: Vec3,
}

/// Cotangent accumulators per vertex, in the frames where each chain ends.
pub(crate) struct RasterGrads {
    pub screen: Vec<Vec2>,
    pub near: Vec<f64>,
    pub cam: Vec<Vec3>,
    pub color: Vec<Vec3>,
}

impl RasterGrads {
    fn zeros(n: usize) -> RasterGrads {
        RasterGrads {
            screen: vec![Vec2::ZERO; n],
            near: vec![0.0; n],
            cam: vec![Vec3::ZERO; n],
            color: vec![Vec3::ZERO; n],
        }
    }
}

impl<'a> Scene<'a> {
    fn build(
        pipeline: &RenderPipeline,
        mesh: &'a TriangleMesh,
        proj: &'a ProjectedMesh,
        shader: Shader,
        material: Material,
    ) -> Scene<'a> {
        let albedo = match material {
            Material::Uniform(c) => vec![c; mesh.num_vertices()],
            Material::VertexColors => mesh
                .vertex_colors()
                .map(|c| c.to_vec())
                .unwrap_or_else(|| vec![Vec3::ONE; mesh.num_vertices()]),
        };
        let rot = *pipeline.camera.extrinsics().rotation();
        let vertex_normals_cam = mesh
            .vertex_normals()
            .map(|ns| ns.iter().map(|&n| rot * n).collect());
        let lights_cam = pipeline
            .lights
            .iter()
            .map(|l| {
                let mut lc = *l;
                lc.direction = rot * l.direction;
                lc
            })
            .collect();
        Scene {
            proj,
            faces: mesh.faces(),
            albedo,
            vertex_normals_cam,
            shader,
            lights_cam,
            background: pipeline.background,
        }
    }

    fn flat_normal(&self, f: usize) -> (Vec3, f64) {
        let [a, b, c] = self.faces[f];
        let m = (self.proj.cam[b] - self.proj.cam[a]).cross(self.proj.cam[c] - self.proj.cam[a]);
        let len = m.norm();
        (
            if len > 1e-300 {
                m / len
            } else {
                Vec3::new(0.0, 0.0, -1.0)
            },
            len,
        )
    }

    /// Color of face `f` at attribute weights `rho`.
    pub(crate) fn eval_color_from_rho(&self, f: usize, rho: [f64; 3]) -> ColorEval {
        let face = self.faces[f];
        let albedo = self.albedo[face[0]] * rho[0]
            + self.albedo[face[1]] * rho[1]
            + self.albedo[face[2]] * rho[2];
        if self.shader == Shader::Unlit {
            return ColorEval {
                rho,
                albedo,
                normal: Vec3::new(0.0, 0.0, -1.0),
                m_len: 0.0,
                flat: false,
                color: albedo,
            };
        }
        // Normal: interpolated vertex normals when present, else the flat
        // camera-space face normal.
        let (normal, m_len, flat) = match &self.vertex_normals_cam {
            Some(ns) => {
                let m = ns[face[0]] * rho[0] + ns[face[1]] * rho[1] + ns[face[2]] * rho[2];
                let len = m.norm();
                if len > 1e-12 {
                    (m / len, len, false)
                } else {
                    let (n, l) = self.flat_normal(f);
                    (n, l, true)
                }
            }
            None => {
                let (n, l) = self.flat_normal(f);
                (n, l, true)
            }
        };
        let view = if self.proj.pinhole {
            let pos = self.proj.cam[face[0]] * rho[0]
                + self.proj.cam[face[1]] * rho[1]
                + self.proj.cam[face[2]] * rho[2];
            (-pos).try_normalize().unwrap_or(Vec3::new(0.0, 0.0, -1.0))
        } else {
            Vec3::new(0.0, 0.0, -1.0)
        };
        let color = shade(self.shader, normal, view, &self.lights_cam, albedo);
        ColorEval {
            rho,
            albedo,
            normal,
            m_len,
            flat,
            color,
        }
    }

    /// Color at clamped-normalized barycentric weights (the soft path).
    pub(crate) fn eval_color(&self, f: usize, lambda_n: [f64; 3]) -> ColorEval {
        let face = self.faces[f];
        let q = [
            self.proj.nearness[face[0]],
            self.proj.nearness[face[1]],
            self.proj.nearness[face[2]],
        ];
        let rho = screen::attribute_weights(lambda_n, q, self.proj.pinhole);
        self.eval_color_from_rho(f, rho)
    }

    /// Backward of `eval_color_from_rho` for Unlit and Lambertian shading:
    /// accumulates vertex-color and camera-position cotangents, returns the
    /// cotangent on `rho`. Callers guarantee the shader is supported.
    pub(crate) fn eval_color_vjp(
        &self,
        f: usize,
        eval: &ColorEval,
        g_color: Vec3,
        grads: &mut RasterGrads,
    ) -> [f64; 3] {
        let face = self.faces[f];
        let (g_albedo, g_normal) = match self.shader {
            Shader::Unlit => (g_color, Vec3::ZERO),
            Shader::Lambertian => {
                let factor = shading::diffuse_factor(eval.normal, &self.lights_cam);
                let g_albedo = g_color.mul_elem(factor);
                let g_factor = g_color.mul_elem(eval.albedo);
                let g_n =
                    shading::diffuse_factor_normal_vjp(eval.normal, &self.lights_cam, g_factor);
                (g_albedo, g_n)
            }
            _ => unreachable!("gradient-capable shaders are Unlit and Lambertian"),
        };

        let mut g_rho = [0.0; 3];
        for k in 0..3 {
            grads.color[face[k]] += g_albedo * eval.rho[k];
            g_rho[k] += g_albedo.dot(self.albedo[face[k]]);
        }

        if g_normal != Vec3::ZERO && eval.m_len > 1e-12 {
            // n = m / |m|.
            let g_m = (g_normal - eval.normal * eval.normal.dot(g_normal)) / eval.m_len;
            if eval.flat {
                // m = (b - a) x (c - a) in camera space.
                let a = self.proj.cam[face[0]];
                let b = self.proj.cam[face[1]];
                let c = self.proj.cam[face[2]];
                let e1 = b - a;
                let e2 = c - a;
                let g_e1 = e2.cross(g_m);
                let g_e2 = g_m.cross(e1);
                grads.cam[face[1]] += g_e1;
                grads.cam[face[2]] += g_e2;
                grads.cam[face[0]] -= g_e1 + g_e2;
            } else if let Some(ns) = &self.vertex_normals_cam {
                for k in 0..3 {
                    g_rho[k] += g_m.dot(ns[face[k]]);
                }
            }
        }
        g_rho
    }
}

/// Hard z-buffer rasterization of the mesh's vertex colors (white where
/// colors are absent). The non-differentiable reference mode.
pub fn rasterize_hard(pipeline: &RenderPipeline, mesh: &TriangleMesh) -> Result<RenderOutput> {
    let proj = project_mesh(&pipeline.camera, mesh);
    let scene = Scene::build(pipeline, mesh, &proj, Shader::Unlit, Material::VertexColors);
    Ok(hard_output(&scene, pipeline))
}

fn hard_output(scene: &Scene, pipeline: &RenderPipeline) -> RenderOutput {
    let (width, height) = pipeline.image_size;
    let core = hard::rasterize_hard_core(scene.proj, scene.faces, width, height);
    let mut color = Image::filled(width, height, pipeline.background);
    let mut alpha = vec![0.0; width * height];
    for y in 0..height {
        for x in 0..width {
            let idx = y * width + x;
            if core.face_ids[idx] >= 0 {
                let f = core.face_ids[idx] as usize;
                let rho = hard::owner_weights(scene.proj, scene.faces[f], core.bary[idx]);
                color.set_pixel3(x, y, scene.eval_color_from_rho(f, rho).color);
                alpha[idx] = 1.0;
            }
        }
    }
    RenderOutput {
        width,
        height,
        color,
        alpha,
        depth: Some(core.depth),
        face_ids: Some(core.face_ids),
    }
}

/// Soft rasterization of the mesh's vertex colors.
pub fn rasterize_soft(
    pipeline: &RenderPipeline,
    mesh: &TriangleMesh,
    settings: &SoftSettings,
) -> Result<RenderOutput> {
    settings.validate()?;
    let proj = project_mesh(&pipeline.camera, mesh);
    let scene = Scene::build(pipeline, mesh, &proj, Shader::Unlit, Material::VertexColors);
    let (width, height) = pipeline.image_size;
    Ok(soft::rasterize_soft_scene(&scene, settings, width, height))
}

/// DIB rasterization of the mesh's vertex colors.
pub fn rasterize_dib(
    pipeline: &RenderPipeline,
    mesh: &TriangleMesh,
    alpha_delta: f64,
) -> Result<RenderOutput> {
    if !(alpha_delta > 0.0) {
        return Err(GeoError::Config(format!("alpha_delta must be positive, got {alpha_delta}")));
    }
    let proj = project_mesh(&pipeline.camera, mesh);
    let scene = Scene::build(pipeline, mesh, &proj, Shader::Unlit, Material::VertexColors);
    let (width, height) = pipeline.image_size;
    Ok(dib::rasterize_dib_scene(&scene, alpha_delta, width, height).0)
}

/// The full pipeline: transform, project, rasterize with the pipeline's
/// mode, shade per pixel with the pipeline's shader.
pub fn render(
    pipeline: &RenderPipeline,
    mesh: &TriangleMesh,
    material: Material,
) -> Result<RenderOutput> {
    let proj = project_mesh(&pipeline.camera, mesh);
    let scene = Scene::build(pipeline, mesh, &proj, pipeline.shader, material);
    let (width, height) = pipeline.image_size;
    Ok(match pipeline.rasterizer {
        Rasterizer::Hard => hard_output(&scene, pipeline),
        Rasterizer::Soft(settings) => {
            settings.validate()?;
            soft::rasterize_soft_scene(&scene, &settings, width, height)
        }
        Rasterizer::Dib { alpha_delta } => {
            dib::rasterize_dib_scene(&scene, alpha_delta, width, height).0
        }
    })
}

/// Analytic gradients of a render with respect to vertex positions and
/// vertex colors, given cotangents on the color image and alpha. Soft and
/// DIB rasterizers with Unlit or Lambertian shading only.
pub fn render_vjp(
    pipeline: &RenderPipeline,
    mesh: &TriangleMesh,
    material: Material,
    upstream_color: &Image,
    upstream_alpha: &[f64],
) -> Result<RenderGradients> {
    let (width, height) = pipeline.image_size;
    if upstream_color.width() != width
        || upstream_color.height() != height
        || upstream_color.channels() != 3
        || upstream_alpha.len() != width * height
    {
        return Err(GeoError::Config(
            "upstream cotangent shapes do not match the image".into(),
        ));
    }
    if !matches!(pipeline.shader, Shader::Unlit | Shader::Lambertian) {
        return Err(GeoError::UnsupportedGradient(format!(
            "shader {:?} has no analytic VJP; use Unlit or Lambertian",
            pipeline.shader
        )));
    }
    let proj = project_mesh(&pipeline.camera, mesh);
    let scene = Scene::build(pipeline, mesh, &proj, pipeline.shader, material);
    let mut grads = RasterGrads::zeros(mesh.num_vertices());
    match pipeline.rasterizer {
        Rasterizer::Hard => {
            return Err(GeoError::UnsupportedGradient(
                "the hard rasterizer is not differentiable; use Soft or Dib".into(),
            ))
        }
        Rasterizer::Soft(settings) => {
            settings.validate()?;
            soft::rasterize_soft_vjp_scene(
                &scene,
                &settings,
                width,
                height,
                upstream_color,
                upstream_alpha,
                &mut grads,
            );
        }
        Rasterizer::Dib { alpha_delta } => {
            dib::rasterize_dib_vjp_scene(
                &scene,
                alpha_delta,
                width,
                height,
                upstream_color,
                upstream_alpha,
                &mut grads,
            );
        }
    }
    Ok(finalize_grads(&pipeline.camera, &proj, grads))
}

/// Discrete-choice signature of a render configuration, used by the
/// gradient checker to skip finite-difference probes that cross owner or
/// argmin discontinuities.
pub fn render_signature(
    pipeline: &RenderPipeline,
    mesh: &TriangleMesh,
    material: Material,
) -> Result<u64> {
    let proj = project_mesh(&pipeline.camera, mesh);
    let scene = Scene::build(pipeline, mesh, &proj, pipeline.shader, material);
    let (width, height) = pipeline.image_size;
    match pipeline.rasterizer {
        Rasterizer::Hard => Err(GeoError::UnsupportedGradient(
            "the hard rasterizer has no gradient signature".into(),
        )),
        Rasterizer::Soft(settings) => Ok(soft::soft_signature(&scene, &settings, width, height)),
        Rasterizer::Dib { .. } => Ok(dib::dib_signature(&scene, width, height)),
    }
}

/// Chain screen-space and nearness cotangents through the projection and
/// the rigid transform back to world space.
fn finalize_grads(camera: &Camera, proj: &ProjectedMesh, grads: RasterGrads) -> RenderGradients {
    let n = proj.cam.len();
    let rot_t = camera.extrinsics().rotation().transpose();
    let mut positions = vec![Vec3::ZERO; n];
    for v in 0..n {
        let g_screen = grads.screen[v];
        let g_near = grads.near[v];
        let mut g_cam = grads.cam[v];
        if g_screen == Vec2::ZERO && g_near == 0.0 && g_cam == Vec3::ZERO {
            continue;
        }
        let cam = proj.cam[v];
        match *camera.intrinsics() {
            Intrinsics::Pinhole { fx, fy, .. } => {
                let z = cam.z;
                g_cam.x += g_screen.x * fx / z;
                g_cam.y += g_screen.y * fy / z;
                g_cam.z += -g_screen.x * fx * cam.x / (z * z)
                    - g_screen.y * fy * cam.y / (z * z)
                    - g_near / (z * z);
            }
            Intrinsics::Orthographic { scale_x, scale_y, .. } => {
                g_cam.x += g_screen.x / scale_x;
                g_cam.y += g_screen.y / scale_y;
                g_cam.z += -g_near;
            }
        }
        positions[v] = rot_t * g_cam;
    }
    RenderGradients {
        positions,
        colors: grads.color,
    }
}
