//! `DiffOp` adapters over the library's differentiable operations, plus a
//! registry of canned configurations for the CLI and the acceptance suite.

use crate::accel::{build_adjacency, MeshAdjacency, TriangleBvh};
use crate::camera::{Camera, Intrinsics};
use crate::convert::{sample_points_on_mesh, sample_points_vjp, SampledPoints};
use crate::error::{GeoError, Result};
use crate::image::Image;
use crate::math::Vec3;
use crate::mesh::TriangleMesh;
use crate::metrics;
use crate::pointcloud::PointCloud;
use crate::render::{
    render_signature, render_vjp, Material, Rasterizer, RenderPipeline, Shader, SoftSettings,
};
use crate::rng::Rng;
use crate::transform::{exp_so3, RigidTransform};

use super::DiffOp;

pub fn flatten_vec3(points: &[Vec3]) -> Vec<f64> {
    let mut out = Vec::with_capacity(points.len() * 3);
    for p in points {
        out.extend_from_slice(&[p.x, p.y, p.z]);
    }
    out
}

pub fn unflatten_vec3(buf: &[f64]) -> Vec<Vec3> {
    buf.chunks_exact(3)
        .map(|c| Vec3::new(c[0], c[1], c[2]))
        .collect()
}

fn hash_indices(values: impl IntoIterator<Item = usize>) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    for v in values {
        h ^= v as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Rigid transform applied to a flat point buffer.
pub struct TransformPointsOp {
    pub transform: RigidTransform,
    pub num_points: usize,
}

impl DiffOp for TransformPointsOp {
    fn name(&self) -> &str {
        "transform_points"
    }

    fn input_sizes(&self) -> Vec<usize> {
        vec![self.num_points * 3]
    }

    fn output_size(&self) -> usize {
        self.num_points * 3
    }

    fn forward(&self, inputs: &[Vec<f64>]) -> Vec<f64> {
        let pts = unflatten_vec3(&inputs[0]);
        flatten_vec3(&pts.iter().map(|&p| self.transform.apply(p)).collect::<Vec<_>>())
    }

    fn vjp(&self, _inputs: &[Vec<f64>], upstream: &[f64]) -> Vec<Vec<f64>> {
        let rot_t = self.transform.rotation().transpose();
        let gs = unflatten_vec3(upstream);
        vec![flatten_vec3(&gs.iter().map(|&g| rot_t * g).collect::<Vec<_>>())]
    }
}

/// The reparameterized sampling forward: face choices and barycentric
/// weights held fixed, vertices free.
pub struct SamplePointsFixedOp {
    pub faces: Vec<[usize; 3]>,
    pub sampled: SampledPoints,
    pub num_vertices: usize,
}

impl SamplePointsFixedOp {
    pub fn from_mesh(mesh: &TriangleMesh, n: usize, seed: u64) -> Result<SamplePointsFixedOp> {
        Ok(SamplePointsFixedOp {
            faces: mesh.faces().to_vec(),
            sampled: sample_points_on_mesh(mesh, n, seed)?,
            num_vertices: mesh.num_vertices(),
        })
    }

    fn mesh(&self, verts: &[f64]) -> TriangleMesh {
        TriangleMesh::new(unflatten_vec3(verts), self.faces.clone()).expect("valid probe mesh")
    }
}

impl DiffOp for SamplePointsFixedOp {
    fn name(&self) -> &str {
        "sample_points"
    }

    fn input_sizes(&self) -> Vec<usize> {
        vec![self.num_vertices * 3]
    }

    fn output_size(&self) -> usize {
        self.sampled.len() * 3
    }

    fn forward(&self, inputs: &[Vec<f64>]) -> Vec<f64> {
        let mesh = self.mesh(&inputs[0]);
        let points: Vec<Vec3> = (0..self.sampled.len())
            .map(|i| self.sampled.reconstruct(&mesh, i))
            .collect();
        flatten_vec3(&points)
    }

    fn vjp(&self, inputs: &[Vec<f64>], upstream: &[f64]) -> Vec<Vec<f64>> {
        let mesh = self.mesh(&inputs[0]);
        let grads = sample_points_vjp(&mesh, &self.sampled, &unflatten_vec3(upstream))
            .expect("upstream length matches the sample count");
        vec![flatten_vec3(&grads)]
    }
}

/// Chamfer distance between two free point sets.
pub struct ChamferOp {
    pub size_a: usize,
    pub size_b: usize,
}

impl DiffOp for ChamferOp {
    fn name(&self) -> &str {
        "chamfer"
    }

    fn input_sizes(&self) -> Vec<usize> {
        vec![self.size_a * 3, self.size_b * 3]
    }

    fn output_size(&self) -> usize {
        1
    }

    fn forward(&self, inputs: &[Vec<f64>]) -> Vec<f64> {
        let a = PointCloud::new(unflatten_vec3(&inputs[0])).unwrap();
        let b = PointCloud::new(unflatten_vec3(&inputs[1])).unwrap();
        vec![metrics::chamfer_distance(&a, &b).unwrap().value]
    }

    fn vjp(&self, inputs: &[Vec<f64>], upstream: &[f64]) -> Vec<Vec<f64>> {
        let a = PointCloud::new(unflatten_vec3(&inputs[0])).unwrap();
        let b = PointCloud::new(unflatten_vec3(&inputs[1])).unwrap();
        let result = metrics::chamfer_distance(&a, &b).unwrap();
        let (ga, gb) = metrics::chamfer_distance_vjp(&a, &b, &result, upstream[0]);
        vec![flatten_vec3(&ga), flatten_vec3(&gb)]
    }

    fn signature(&self, inputs: &[Vec<f64>]) -> Option<u64> {
        let a = PointCloud::new(unflatten_vec3(&inputs[0])).unwrap();
        let b = PointCloud::new(unflatten_vec3(&inputs[1])).unwrap();
        let r = metrics::chamfer_distance(&a, &b).unwrap();
        Some(hash_indices(
            r.nearest_in_b.iter().chain(r.nearest_in_a.iter()).copied(),
        ))
    }
}

/// Chamfer distance to a fixed target cloud (single input slot, usable in
/// pipelines).
pub struct ChamferToFixedOp {
    pub target: PointCloud,
    pub num_points: usize,
}

impl DiffOp for ChamferToFixedOp {
    fn name(&self) -> &str {
        "chamfer_to_fixed"
    }

    fn input_sizes(&self) -> Vec<usize> {
        vec![self.num_points * 3]
    }

    fn output_size(&self) -> usize {
        1
    }

    fn forward(&self, inputs: &[Vec<f64>]) -> Vec<f64> {
        let a = PointCloud::new(unflatten_vec3(&inputs[0])).unwrap();
        vec![metrics::chamfer_distance(&a, &self.target).unwrap().value]
    }

    fn vjp(&self, inputs: &[Vec<f64>], upstream: &[f64]) -> Vec<Vec<f64>> {
        let a = PointCloud::new(unflatten_vec3(&inputs[0])).unwrap();
        let result = metrics::chamfer_distance(&a, &self.target).unwrap();
        let (ga, _) = metrics::chamfer_distance_vjp(&a, &self.target, &result, upstream[0]);
        vec![flatten_vec3(&ga)]
    }

    fn signature(&self, inputs: &[Vec<f64>]) -> Option<u64> {
        let a = PointCloud::new(unflatten_vec3(&inputs[0])).unwrap();
        let r = metrics::chamfer_distance(&a, &self.target).unwrap();
        Some(hash_indices(
            r.nearest_in_b.iter().chain(r.nearest_in_a.iter()).copied(),
        ))
    }
}

/// Mean squared distance of free points to a fixed mesh.
pub struct PointToSurfaceOp {
    pub bvh: TriangleBvh,
    pub num_points: usize,
}

impl DiffOp for PointToSurfaceOp {
    fn name(&self) -> &str {
        "point_to_surface"
    }

    fn input_sizes(&self) -> Vec<usize> {
        vec![self.num_points * 3]
    }

    fn output_size(&self) -> usize {
        1
    }

    fn forward(&self, inputs: &[Vec<f64>]) -> Vec<f64> {
        let pts = unflatten_vec3(&inputs[0]);
        vec![metrics::point_to_surface(&pts, &self.bvh).unwrap().value]
    }

    fn vjp(&self, inputs: &[Vec<f64>], upstream: &[f64]) -> Vec<Vec<f64>> {
        let pts = unflatten_vec3(&inputs[0]);
        let result = metrics::point_to_surface(&pts, &self.bvh).unwrap();
        vec![flatten_vec3(&metrics::point_to_surface_vjp(&pts, &result, upstream[0]))]
    }

    // No signature: the squared distance to a closed surface is C1 away
    // from the medial axis. Argmin face flips at edge projections do not
    // break differentiability (the closest point varies continuously), so
    // hashing them would only discard valid probes. Configurations keep
    // query points off the medial axis.
}

/// Which mesh regularizer a `RegularizerOp` evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegularizerKind {
    Laplacian,
    EdgeLength,
    Smoothness,
}

/// A mesh regularizer over free vertices with fixed connectivity.
pub struct RegularizerOp {
    pub kind: RegularizerKind,
    pub faces: Vec<[usize; 3]>,
    pub adjacency: MeshAdjacency,
    pub num_vertices: usize,
}

impl RegularizerOp {
    pub fn from_mesh(mesh: &TriangleMesh, kind: RegularizerKind) -> Result<RegularizerOp> {
        Ok(RegularizerOp {
            kind,
            faces: mesh.faces().to_vec(),
            adjacency: build_adjacency(mesh)?,
            num_vertices: mesh.num_vertices(),
        })
    }

    fn mesh(&self, verts: &[f64]) -> TriangleMesh {
        TriangleMesh::new(unflatten_vec3(verts), self.faces.clone()).expect("valid probe mesh")
    }
}

impl DiffOp for RegularizerOp {
    fn name(&self) -> &str {
        match self.kind {
            RegularizerKind::Laplacian => "laplacian_loss",
            RegularizerKind::EdgeLength => "edge_length_loss",
            RegularizerKind::Smoothness => "smoothness_loss",
        }
    }

    fn input_sizes(&self) -> Vec<usize> {
        vec![self.num_vertices * 3]
    }

    fn output_size(&self) -> usize {
        1
    }

    fn forward(&self, inputs: &[Vec<f64>]) -> Vec<f64> {
        let mesh = self.mesh(&inputs[0]);
        let v = match self.kind {
            RegularizerKind::Laplacian => metrics::laplacian_loss(&mesh, &self.adjacency),
            RegularizerKind::EdgeLength => metrics::edge_length_loss(&mesh, &self.adjacency),
            RegularizerKind::Smoothness => metrics::smoothness_loss(&mesh, &self.adjacency),
        };
        vec![v.unwrap()]
    }

    fn vjp(&self, inputs: &[Vec<f64>], upstream: &[f64]) -> Vec<Vec<f64>> {
        let mesh = self.mesh(&inputs[0]);
        let g = match self.kind {
            RegularizerKind::Laplacian => {
                metrics::laplacian_loss_vjp(&mesh, &self.adjacency, upstream[0])
            }
            RegularizerKind::EdgeLength => {
                metrics::edge_length_loss_vjp(&mesh, &self.adjacency, upstream[0])
            }
            RegularizerKind::Smoothness => {
                metrics::smoothness_loss_vjp(&mesh, &self.adjacency, upstream[0])
            }
        };
        vec![flatten_vec3(&g.unwrap())]
    }
}

/// A differentiable rasterization: free vertex positions and colors, fixed
/// camera and topology. Output is the color image followed by alpha.
pub struct RasterizeOp {
    pub pipeline: RenderPipeline,
    pub faces: Vec<[usize; 3]>,
    pub num_vertices: usize,
    label: String,
}

impl RasterizeOp {
    pub fn new(pipeline: RenderPipeline, faces: Vec<[usize; 3]>, num_vertices: usize) -> RasterizeOp {
        let label = match pipeline.rasterizer {
            Rasterizer::Soft(_) => "rasterize_soft",
            Rasterizer::Dib { .. } => "rasterize_dib",
            Rasterizer::Hard => "rasterize_hard",
        }
        .to_string();
        RasterizeOp {
            pipeline,
            faces,
            num_vertices,
            label,
        }
    }

    fn mesh(&self, verts: &[f64], colors: &[f64]) -> TriangleMesh {
        TriangleMesh::new(unflatten_vec3(verts), self.faces.clone())
            .expect("valid probe mesh")
            .with_vertex_colors(unflatten_vec3(colors))
            .expect("probe colors stay in [0,1]")
    }

    fn pixels(&self) -> usize {
        self.pipeline.image_size.0 * self.pipeline.image_size.1
    }
}

impl DiffOp for RasterizeOp {
    fn name(&self) -> &str {
        &self.label
    }

    fn input_sizes(&self) -> Vec<usize> {
        vec![self.num_vertices * 3, self.num_vertices * 3]
    }

    fn output_size(&self) -> usize {
        self.pixels() * 4
    }

    fn forward(&self, inputs: &[Vec<f64>]) -> Vec<f64> {
        let mesh = self.mesh(&inputs[0], &inputs[1]);
        let out = crate::render::render(&self.pipeline, &mesh, Material::VertexColors).unwrap();
        let mut buf = out.color.data().to_vec();
        buf.extend_from_slice(&out.alpha);
        buf
    }

    fn vjp(&self, inputs: &[Vec<f64>], upstream: &[f64]) -> Vec<Vec<f64>> {
        let mesh = self.mesh(&inputs[0], &inputs[1]);
        let pixels = self.pixels();
        let (w, h) = self.pipeline.image_size;
        let g_color = Image::new(w, h, 3, upstream[..pixels * 3].to_vec()).unwrap();
        let g_alpha = &upstream[pixels * 3..];
        let grads =
            render_vjp(&self.pipeline, &mesh, Material::VertexColors, &g_color, g_alpha).unwrap();
        vec![flatten_vec3(&grads.positions), flatten_vec3(&grads.colors)]
    }

    fn signature(&self, inputs: &[Vec<f64>]) -> Option<u64> {
        let mesh = self.mesh(&inputs[0], &inputs[1]);
        render_signature(&self.pipeline, &mesh, Material::VertexColors).ok()
    }
}

/// Rasterization with colors bound, vertices as the single free slot;
/// suitable as a pipeline stage.
pub struct RenderVertsOp {
    pub inner: RasterizeOp,
    pub colors: Vec<f64>,
}

impl DiffOp for RenderVertsOp {
    fn name(&self) -> &str {
        "render_verts"
    }

    fn input_sizes(&self) -> Vec<usize> {
        vec![self.inner.num_vertices * 3]
    }

    fn output_size(&self) -> usize {
        self.inner.output_size()
    }

    fn forward(&self, inputs: &[Vec<f64>]) -> Vec<f64> {
        self.inner.forward(&[inputs[0].clone(), self.colors.clone()])
    }

    fn vjp(&self, inputs: &[Vec<f64>], upstream: &[f64]) -> Vec<Vec<f64>> {
        let mut g = self
            .inner
            .vjp(&[inputs[0].clone(), self.colors.clone()], upstream);
        g.truncate(1);
        g
    }

    fn signature(&self, inputs: &[Vec<f64>]) -> Option<u64> {
        self.inner.signature(&[inputs[0].clone(), self.colors.clone()])
    }
}

/// Mean squared difference to a fixed target buffer.
pub struct L2LossOp {
    pub target: Vec<f64>,
}

impl DiffOp for L2LossOp {
    fn name(&self) -> &str {
        "l2_loss"
    }

    fn input_sizes(&self) -> Vec<usize> {
        vec![self.target.len()]
    }

    fn output_size(&self) -> usize {
        1
    }

    fn forward(&self, inputs: &[Vec<f64>]) -> Vec<f64> {
        let n = self.target.len() as f64;
        vec![
            inputs[0]
                .iter()
                .zip(&self.target)
                .map(|(x, t)| (x - t) * (x - t))
                .sum::<f64>()
                / n,
        ]
    }

    fn vjp(&self, inputs: &[Vec<f64>], upstream: &[f64]) -> Vec<Vec<f64>> {
        let n = self.target.len() as f64;
        vec![inputs[0]
            .iter()
            .zip(&self.target)
            .map(|(x, t)| 2.0 * (x - t) / n * upstream[0])
            .collect()]
    }
}

/// A random small scene for rasterizer gradient checks: up to `n_faces`
/// disconnected triangles in front of the camera, alternating orthographic
/// and pinhole projection by seed.
pub fn random_raster_scene(
    seed: u64,
    n_faces: usize,
    size: usize,
    soft: bool,
) -> (RasterizeOp, Vec<Vec<f64>>) {
    let mut rng = Rng::new(seed);
    let n_verts = n_faces * 3;
    let mut verts = Vec::with_capacity(n_verts);
    let mut faces = Vec::with_capacity(n_faces);
    for f in 0..n_faces {
        // Triangles with a minimum extent, to keep projected areas sane.
        let center = Vec3::new(rng.range(-0.8, 0.8), rng.range(-0.8, 0.8), rng.range(-0.4, 0.4));
        for _ in 0..3 {
            verts.push(
                center
                    + Vec3::new(
                        rng.range(-0.45, 0.45),
                        rng.range(-0.45, 0.45),
                        rng.range(-0.2, 0.2),
                    ),
            );
        }
        faces.push([f * 3, f * 3 + 1, f * 3 + 2]);
    }
    let colors: Vec<Vec3> = (0..n_verts)
        .map(|_| Vec3::new(rng.range(0.2, 0.8), rng.range(0.2, 0.8), rng.range(0.2, 0.8)))
        .collect();

    let intrinsics = if seed % 2 == 0 {
        Intrinsics::Orthographic {
            scale_x: 2.8 / size as f64,
            scale_y: 2.8 / size as f64,
            cx: size as f64 / 2.0,
            cy: size as f64 / 2.0,
        }
    } else {
        Intrinsics::Pinhole {
            fx: 0.75 * size as f64,
            fy: 0.75 * size as f64,
            cx: size as f64 / 2.0,
            cy: size as f64 / 2.0,
        }
    };
    let camera = Camera::new(
        RigidTransform::from_translation(Vec3::new(0.0, 0.0, 3.0)),
        intrinsics,
        (size, size),
    )
    .unwrap();
    let rasterizer = if soft {
        Rasterizer::Soft(SoftSettings {
            sigma: 1.0,
            gamma: 0.05,
            background_eps: 1e-3,
        })
    } else {
        Rasterizer::Dib { alpha_delta: 1.5 }
    };
    let pipeline = RenderPipeline::new(
        camera,
        rasterizer,
        Shader::Unlit,
        vec![],
        Vec3::new(0.1, 0.1, 0.1),
    )
    .unwrap();

    let op = RasterizeOp::new(pipeline, faces, n_verts);
    let inputs = vec![flatten_vec3(&verts), flatten_vec3(&colors)];
    (op, inputs)
}

/// One entry of the named gradient-check registry.
pub struct NamedCheck {
    pub op: Box<dyn DiffOp>,
    pub inputs: Vec<Vec<f64>>,
    pub probes: usize,
    pub eps: f64,
    pub tol: f64,
}

pub fn registry_names() -> &'static [&'static str] {
    &[
        "transform_points",
        "sample_points",
        "chamfer",
        "point_to_surface",
        "laplacian_loss",
        "edge_length_loss",
        "smoothness_loss",
        "rasterize_soft",
        "rasterize_dib",
    ]
}

/// Build the canned configuration for a named check.
pub fn registry(name: &str) -> Result<NamedCheck> {
    let mut rng = Rng::new(0x6e0c_0de ^ name.len() as u64);
    match name {
        "transform_points" => {
            let points: Vec<Vec3> = (0..50)
                .map(|_| Vec3::new(rng.range(-2.0, 2.0), rng.range(-2.0, 2.0), rng.range(-2.0, 2.0)))
                .collect();
            let transform = RigidTransform::new(
                exp_so3(Vec3::new(0.4, -0.7, 0.2)),
                Vec3::new(1.0, -2.0, 0.5),
            )
            .unwrap();
            // Zero truncation error for a linear map, so a large step keeps
            // the difference far above f64 cancellation noise.
            Ok(NamedCheck {
                op: Box::new(TransformPointsOp {
                    transform,
                    num_points: 50,
                }),
                inputs: vec![flatten_vec3(&points)],
                probes: 20,
                eps: 1e-2,
                tol: 1e-10,
            })
        }
        "sample_points" => {
            let mesh = crate::shapes::icosphere(Vec3::ZERO, 1.0, 1);
            let op = SamplePointsFixedOp::from_mesh(&mesh, 200, 7)?;
            Ok(NamedCheck {
                inputs: vec![flatten_vec3(mesh.vertices())],
                op: Box::new(op),
                probes: 20,
                eps: 1e-5,
                tol: 1e-6,
            })
        }
        "chamfer" => {
            let a: Vec<Vec3> = (0..64)
                .map(|_| Vec3::new(rng.uniform(), rng.uniform(), rng.uniform()))
                .collect();
            let b: Vec<Vec3> = (0..64)
                .map(|_| Vec3::new(rng.uniform(), rng.uniform(), rng.uniform()))
                .collect();
            Ok(NamedCheck {
                op: Box::new(ChamferOp {
                    size_a: 64,
                    size_b: 64,
                }),
                inputs: vec![flatten_vec3(&a), flatten_vec3(&b)],
                probes: 20,
                eps: 1e-5,
                tol: 1e-6,
            })
        }
        "point_to_surface" => {
            let mesh = crate::shapes::icosphere(Vec3::ZERO, 1.0, 2);
            let bvh = TriangleBvh::build(&mesh)?;
            let points: Vec<Vec3> = (0..40)
                .map(|_| {
                    let dir = Vec3::new(rng.normal(), rng.normal(), rng.normal())
                        .try_normalize()
                        .unwrap_or(Vec3::new(1.0, 0.0, 0.0));
                    dir * rng.range(1.05, 1.8)
                })
                .collect();
            Ok(NamedCheck {
                op: Box::new(PointToSurfaceOp {
                    bvh,
                    num_points: 40,
                }),
                inputs: vec![flatten_vec3(&points)],
                probes: 20,
                eps: 1e-5,
                tol: 1e-6,
            })
        }
        "laplacian_loss" | "edge_length_loss" | "smoothness_loss" => {
            let kind = match name {
                "laplacian_loss" => RegularizerKind::Laplacian,
                "edge_length_loss" => RegularizerKind::EdgeLength,
                _ => RegularizerKind::Smoothness,
            };
            // A bumpy sphere so none of the losses sit at a stationary point.
            let mesh = crate::shapes::icosphere(Vec3::ZERO, 1.0, 1);
            let verts: Vec<Vec3> = mesh
                .vertices()
                .iter()
                .map(|&v| v * (1.0 + 0.15 * (7.0 * v.x).sin() * (5.0 * v.y).cos()))
                .collect();
            let mesh = mesh.with_vertices(verts).unwrap();
            let op = RegularizerOp::from_mesh(&mesh, kind)?;
            Ok(NamedCheck {
                inputs: vec![flatten_vec3(mesh.vertices())],
                op: Box::new(op),
                probes: 20,
                eps: 1e-5,
                tol: if kind == RegularizerKind::Smoothness {
                    1e-5
                } else {
                    1e-6
                },
            })
        }
        "rasterize_soft" => {
            let (op, inputs) = random_raster_scene(11, 6, 32, true);
            Ok(NamedCheck {
                op: Box::new(op),
                inputs,
                probes: 12,
                eps: 1e-5,
                tol: 1e-3,
            })
        }
        "rasterize_dib" => {
            let (op, inputs) = random_raster_scene(12, 6, 32, false);
            Ok(NamedCheck {
                op: Box::new(op),
                inputs,
                probes: 12,
                eps: 1e-5,
                tol: 1e-3,
            })
        }
        other => Err(GeoError::Config(format!(
            "unknown gradcheck op {other:?}; known: {}",
            registry_names().join(", ")
        ))),
    }
}
