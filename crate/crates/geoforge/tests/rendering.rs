//! Rasterizer consistency and golden-image tests.

mod common;

use geoforge::accel::TriangleBvh;
use geoforge::camera::backproject_depth;
use geoforge::math::Vec3;
use geoforge::mesh::TriangleMesh;
use geoforge::metrics::point_to_surface;
use geoforge::render::{
    rasterize_dib, rasterize_hard, rasterize_soft, render, Light, Material, Rasterizer,
    RenderPipeline, Shader, SoftSettings,
};
use geoforge::shapes;
use geoforge::transform::{euler_to_rotation, EulerConvention, RigidTransform};
use geoforge::{Camera, Intrinsics};

fn ortho_camera(size: usize, scale: f64) -> Camera {
    Camera::new(
        RigidTransform::from_translation(Vec3::new(0.0, 0.0, 3.0)),
        Intrinsics::Orthographic {
            scale_x: scale,
            scale_y: scale,
            cx: size as f64 / 2.0,
            cy: size as f64 / 2.0,
        },
        (size, size),
    )
    .unwrap()
}

fn unlit_pipeline(camera: Camera, rasterizer: Rasterizer) -> RenderPipeline {
    RenderPipeline::new(camera, rasterizer, Shader::Unlit, vec![], Vec3::ZERO).unwrap()
}

#[test]
fn soft_silhouette_converges_to_hard_alpha() {
    // One fixed triangle; sweep sigma downward and watch the mean absolute
    // silhouette error against the hard alpha shrink monotonically.
    let size = 48;
    let camera = ortho_camera(size, 0.05);
    let mesh = TriangleMesh::new(
        vec![
            Vec3::new(-0.8, -0.6, 0.0),
            Vec3::new(0.9, -0.3, 0.0),
            Vec3::new(0.1, 0.8, 0.0),
        ],
        vec![[0, 1, 2]],
    )
    .unwrap();
    let hard = rasterize_hard(&unlit_pipeline(camera, Rasterizer::Hard), &mesh).unwrap();

    // Boundary pixels: centers within half a pixel diagonal of the
    // projected triangle boundary.
    let proj = geoforge::render::project_mesh(&camera, &mesh);
    let boundary_count = (0..size * size)
        .filter(|idx| {
            let p = geoforge::render::screen::pixel_center(idx % size, idx / size);
            let (d2, _, _) = geoforge::render::screen::point_triangle_boundary_sq(
                p,
                proj.screen[0],
                proj.screen[1],
                proj.screen[2],
            );
            d2.sqrt() <= std::f64::consts::SQRT_2 / 2.0
        })
        .count();

    let mut previous = f64::INFINITY;
    let mut last = f64::INFINITY;
    for exponent in 1..=5 {
        let sigma = 10f64.powi(-exponent);
        let settings = SoftSettings {
            sigma,
            gamma: 0.01,
            background_eps: 1e-3,
        };
        let soft = rasterize_soft(&unlit_pipeline(camera, Rasterizer::Hard), &mesh, &settings)
            .unwrap();
        let mean_error: f64 = soft
            .alpha
            .iter()
            .zip(&hard.alpha)
            .map(|(s, h)| (s - h).abs())
            .sum::<f64>()
            / (size * size) as f64;
        assert!(
            mean_error <= previous + 1e-12,
            "sigma {sigma}: error {mean_error} rose above {previous}"
        );
        previous = mean_error;
        last = mean_error;
    }
    let bound = boundary_count as f64 / (size * size) as f64;
    assert!(last <= bound, "final error {last} vs boundary fraction {bound}");
}

#[test]
fn golden_lambertian_sphere_profile() {
    // Orthographic camera straight down +z at a unit icosphere lit from the
    // camera's side: the image intensity must match the analytic
    // max(0, n . l) profile of a sphere.
    let size = 96;
    let scale = 2.4 / size as f64; // frame spans [-1.2, 1.2]
    let camera = ortho_camera(size, scale);
    let mesh = shapes::icosphere(Vec3::ZERO, 1.0, 4);
    // Light toward -z in world: the hemisphere facing the camera is lit
    // (the camera looks along +z from world z = -3).
    let light = Light::directional(Vec3::ONE, Vec3::new(0.0, 0.0, -1.0)).unwrap();
    let pipeline = RenderPipeline::new(
        camera,
        Rasterizer::Hard,
        Shader::Lambertian,
        vec![light],
        Vec3::ZERO,
    )
    .unwrap();
    let out = render(&pipeline, &mesh, Material::Uniform(Vec3::ONE)).unwrap();

    // Brightest pixel sits at the sphere's camera-facing point (the image
    // center), up to one pixel of discretization.
    let mut best = (0usize, 0usize, -1.0);
    for y in 0..size {
        for x in 0..size {
            let v = out.color.get(x, y, 0);
            if v > best.2 {
                best = (x, y, v);
            }
        }
    }
    let center = (size as f64 - 1.0) / 2.0;
    assert!(
        (best.0 as f64 - center).abs() <= 1.5 && (best.1 as f64 - center).abs() <= 1.5,
        "brightest pixel at ({}, {})",
        best.0,
        best.1
    );

    // Intensity profile: for interior pixels the analytic normal of the
    // sphere point under the pixel gives intensity n.l = sqrt(1 - r^2).
    let ids = out.face_ids.as_ref().unwrap();
    let mut checked = 0;
    for y in 0..size {
        for x in 0..size {
            let idx = y * size + x;
            if ids[idx] < 0 {
                continue;
            }
            let wx = (x as f64 + 0.5 - size as f64 / 2.0) * scale;
            let wy = (y as f64 + 0.5 - size as f64 / 2.0) * scale;
            let r2 = wx * wx + wy * wy;
            if r2 > 0.92 * 0.92 {
                continue; // rim pixels alias against the faceted silhouette
            }
            let analytic = (1.0 - r2).sqrt();
            let rendered = out.color.get(x, y, 0);
            assert!(
                (rendered - analytic).abs() <= 2.0 / 255.0,
                "pixel ({x},{y}): rendered {rendered} vs analytic {analytic}"
            );
            checked += 1;
        }
    }
    assert!(checked > 2000, "only {checked} interior pixels compared");
}

#[test]
fn cosine_shader_matches_lambertian_gray_on_white_albedo() {
    let size = 32;
    let camera = ortho_camera(size, 2.4 / size as f64);
    let mesh = shapes::icosphere(Vec3::ZERO, 1.0, 2);
    let light = Light::directional(Vec3::ONE, Vec3::new(0.0, 0.0, -1.0)).unwrap();
    let lam = RenderPipeline::new(camera, Rasterizer::Hard, Shader::Lambertian, vec![light], Vec3::ZERO).unwrap();
    let cos = RenderPipeline::new(camera, Rasterizer::Hard, Shader::Cosine, vec![light], Vec3::ZERO).unwrap();
    let a = render(&lam, &mesh, Material::Uniform(Vec3::ONE)).unwrap();
    let b = render(&cos, &mesh, Material::Uniform(Vec3::ONE)).unwrap();
    // With white light and white albedo the two shaders coincide.
    for (x, y) in a.color.data().iter().zip(b.color.data()) {
        assert!((x - y).abs() < 1e-12);
    }
}

#[test]
fn rendered_depth_backprojects_onto_the_surface() {
    // Render a depth map of a known mesh with a pinhole camera, backproject
    // every pixel, and measure the point-to-surface distance.
    let size = 64;
    let rotation = euler_to_rotation(Vec3::new(0.3, 0.4, 0.0), EulerConvention::Xyz).unwrap();
    let camera = Camera::new(
        RigidTransform::new(rotation, Vec3::new(0.0, 0.0, 3.0)).unwrap(),
        Intrinsics::Pinhole {
            fx: size as f64,
            fy: size as f64,
            cx: size as f64 / 2.0,
            cy: size as f64 / 2.0,
        },
        (size, size),
    )
    .unwrap();
    let mesh = shapes::icosphere(Vec3::ZERO, 1.0, 3);
    let out = rasterize_hard(&unlit_pipeline(camera, Rasterizer::Hard), &mesh).unwrap();
    let depth_map = out.depth_map(&camera).unwrap().unwrap();
    let cloud = backproject_depth(&depth_map);
    assert!(cloud.len() > 500);

    let bvh = TriangleBvh::build(&mesh).unwrap();
    let result = point_to_surface(cloud.points(), &bvh).unwrap();
    // Backprojected points lie on the rendered triangles, so the rms
    // distance is tiny compared to any voxel-scale tolerance.
    assert!(result.value.sqrt() < 1e-9, "rms distance {}", result.value.sqrt());
}

#[test]
fn dib_and_soft_full_pipeline_runs_with_shading() {
    let size = 48;
    let camera = ortho_camera(size, 2.6 / size as f64);
    let mesh = shapes::icosphere(Vec3::ZERO, 1.0, 2);
    let light = Light::directional(Vec3::ONE, Vec3::new(0.2, -0.3, -1.0)).unwrap();
    for rasterizer in [
        Rasterizer::Soft(SoftSettings::default()),
        Rasterizer::Dib { alpha_delta: 1.0 },
    ] {
        let pipeline = RenderPipeline::new(
            camera,
            rasterizer,
            Shader::Lambertian,
            vec![Light::ambient(Vec3::splat(0.1)), light],
            Vec3::splat(0.02),
        )
        .unwrap();
        let out = render(&pipeline, &mesh, Material::Uniform(Vec3::new(0.8, 0.6, 0.4))).unwrap();
        assert!(out.color.is_finite());
        assert!(out.alpha.iter().all(|&a| (0.0..=1.0 + 1e-12).contains(&a)));
        // The sphere must actually show up.
        let mean_alpha: f64 = out.alpha.iter().sum::<f64>() / out.alpha.len() as f64;
        assert!(mean_alpha > 0.2, "mean alpha {mean_alpha}");
    }
}

#[test]
fn phong_adds_specular_highlight() {
    let size = 48;
    let camera = ortho_camera(size, 2.4 / size as f64);
    let mesh = shapes::icosphere(Vec3::ZERO, 1.0, 3);
    let light = Light::directional(Vec3::splat(0.6), Vec3::new(0.0, 0.0, -1.0))
        .unwrap()
        .with_specular(Vec3::splat(0.8), 64.0)
        .unwrap();
    let lam = RenderPipeline::new(camera, Rasterizer::Hard, Shader::Lambertian, vec![light], Vec3::ZERO).unwrap();
    let phong = RenderPipeline::new(camera, Rasterizer::Hard, Shader::Phong, vec![light], Vec3::ZERO).unwrap();
    let a = render(&lam, &mesh, Material::Uniform(Vec3::splat(0.5))).unwrap();
    let b = render(&phong, &mesh, Material::Uniform(Vec3::splat(0.5))).unwrap();
    let center = size / 2;
    let lam_center = a.color.get(center, center, 0);
    let phong_center = b.color.get(center, center, 0);
    assert!(
        phong_center > lam_center + 0.3,
        "specular front-facing highlight missing: {phong_center} vs {lam_center}"
    );
}

#[test]
fn soft_weights_sum_to_one_everywhere() {
    // All-white colors and background: output = per-pixel weight total.
    let size = 24;
    let camera = ortho_camera(size, 2.8 / size as f64);
    let mesh = common::bumpy_sphere(21, 1);
    let n = mesh.num_vertices();
    let mesh = mesh.with_vertex_colors(vec![Vec3::ONE; n]).unwrap();
    let mut pipeline = unlit_pipeline(camera, Rasterizer::Hard);
    pipeline.background = Vec3::ONE;
    for (sigma, gamma) in [(1.0, 0.1), (0.05, 0.01), (3.0, 0.5)] {
        let settings = SoftSettings {
            sigma,
            gamma,
            background_eps: 1e-3,
        };
        let out = rasterize_soft(&pipeline, &mesh, &settings).unwrap();
        for v in out.color.data() {
            assert!((v - 1.0).abs() < 1e-12, "weight sum drift: {v}");
        }
        // Silhouette stays within [0, 1] for all settings.
        assert!(out.alpha.iter().all(|&a| (0.0..=1.0).contains(&a)));
    }
}

#[test]
fn dib_foreground_bit_equal_to_hard_under_pinhole() {
    let size = 40;
    let camera = Camera::new(
        RigidTransform::from_translation(Vec3::new(0.0, 0.0, 3.0)),
        Intrinsics::Pinhole {
            fx: size as f64,
            fy: size as f64,
            cx: size as f64 / 2.0,
            cy: size as f64 / 2.0,
        },
        (size, size),
    )
    .unwrap();
    let mesh = common::bumpy_sphere(4, 2);
    let n = mesh.num_vertices();
    let colors: Vec<Vec3> = (0..n)
        .map(|i| Vec3::new((i % 13) as f64 / 13.0, (i % 7) as f64 / 7.0, (i % 5) as f64 / 5.0))
        .collect();
    let mesh = mesh.with_vertex_colors(colors).unwrap();
    let hard = rasterize_hard(&unlit_pipeline(camera, Rasterizer::Hard), &mesh).unwrap();
    let dib = rasterize_dib(
        &unlit_pipeline(camera, Rasterizer::Dib { alpha_delta: 1.0 }),
        &mesh,
        1.0,
    )
    .unwrap();
    let ids = hard.face_ids.as_ref().unwrap();
    let mut foreground = 0;
    for idx in 0..size * size {
        if ids[idx] >= 0 {
            let (x, y) = (idx % size, idx / size);
            assert_eq!(hard.color.pixel3(x, y), dib.color.pixel3(x, y));
            foreground += 1;
        }
    }
    assert!(foreground > 200);
}
