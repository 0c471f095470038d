//! End-to-end CLI tests: conversions, metrics, determinism across thread
//! counts, exit codes, and the writer/parser closure property.

mod common;

use std::path::{Path, PathBuf};
use std::process::Command;

use geoforge::io::{parse_obj, write_obj};
use geoforge::math::Vec3;
use geoforge::mesh::TriangleMesh;
use geoforge::rng::Rng;
use geoforge::shapes;

fn binary() -> &'static str {
    env!("CARGO_BIN_EXE_geoforge")
}

struct TempDir {
    path: PathBuf,
}

impl TempDir {
    fn new(tag: &str) -> TempDir {
        let path = std::env::temp_dir().join(format!("geoforge_cli_{tag}_{}", std::process::id()));
        std::fs::create_dir_all(&path).unwrap();
        TempDir { path }
    }

    fn file(&self, name: &str) -> PathBuf {
        self.path.join(name)
    }
}

impl Drop for TempDir {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.path);
    }
}

fn run(args: &[&str]) -> (i32, String, String) {
    run_with_threads(args, None)
}

fn run_with_threads(args: &[&str], threads: Option<usize>) -> (i32, String, String) {
    let mut cmd = Command::new(binary());
    cmd.args(args);
    if let Some(t) = threads {
        cmd.env("RAYON_NUM_THREADS", t.to_string());
    }
    let out = cmd.output().expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn write_sphere(path: &Path) {
    let mesh = shapes::icosphere(Vec3::ZERO, 1.0, 2);
    std::fs::write(path, write_obj(&mesh)).unwrap();
}

#[test]
fn metric_chamfer_self_is_zero_line() {
    let dir = TempDir::new("chamfer");
    let mesh_path = dir.file("sphere.obj");
    write_sphere(&mesh_path);
    let (code, stdout, _) = run(&[
        "metric",
        "--kind",
        "chamfer",
        mesh_path.to_str().unwrap(),
        mesh_path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert_eq!(stdout.trim(), "chamfer 0.000000000000");
}

#[test]
fn convert_voxelize_then_iou_self_is_one() {
    let dir = TempDir::new("iou");
    let cube_path = dir.file("cube.obj");
    std::fs::write(&cube_path, write_obj(&shapes::unit_cube())).unwrap();
    let kvox_path = dir.file("out.kvox");
    let (code, _, stderr) = run(&[
        "convert",
        "--from",
        "obj",
        "--to",
        "kvox",
        "--resolution",
        "32",
        "--solid",
        cube_path.to_str().unwrap(),
        kvox_path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "convert failed: {stderr}");
    let (code, stdout, _) = run(&[
        "metric",
        "--kind",
        "iou",
        kvox_path.to_str().unwrap(),
        kvox_path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert_eq!(stdout.trim(), "iou 1.000000000000");
}

#[test]
fn gradcheck_subcommand_reports_no_failures() {
    let (code, stdout, stderr) = run(&["gradcheck", "--op", "rasterize_soft"]);
    assert_eq!(code, 0, "gradcheck failed: {stdout}{stderr}");
    assert!(stdout.contains("failures 0"), "{stdout}");
}

#[test]
fn exit_codes_follow_the_contract() {
    // Usage errors: unknown flag, unknown subcommand, unknown metric.
    let (code, _, _) = run(&["metric", "--kind", "chamfer", "--frobnicate", "a", "b"]);
    assert_eq!(code, 2);
    let (code, _, _) = run(&["definitely-not-a-subcommand"]);
    assert_eq!(code, 2);
    let (code, _, _) = run(&["metric", "--kind", "nope", "a", "b"]);
    assert_eq!(code, 2);
    // Domain errors: missing file, no-crossing grid.
    let (code, _, _) = run(&["metric", "--kind", "chamfer", "/nonexistent.obj", "/nonexistent.obj"]);
    assert_eq!(code, 1);
    // Success with help.
    let (code, _, _) = run(&["--help"]);
    assert_eq!(code, 0);
}

#[test]
fn sample_render_convert_are_byte_deterministic_across_threads() {
    let dir = TempDir::new("determinism");
    let mesh_path = dir.file("sphere.obj");
    write_sphere(&mesh_path);

    // sample
    let mut sample_outputs = Vec::new();
    for (tag, threads) in [("a", Some(1)), ("b", Some(4)), ("c", None)] {
        let out = dir.file(&format!("pts_{tag}.xyz"));
        let (code, _, stderr) = run_with_threads(
            &[
                "sample",
                "--mesh",
                mesh_path.to_str().unwrap(),
                "--n",
                "5000",
                "--seed",
                "42",
                "--out",
                out.to_str().unwrap(),
            ],
            threads,
        );
        assert_eq!(code, 0, "{stderr}");
        sample_outputs.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(sample_outputs[0], sample_outputs[1]);
    assert_eq!(sample_outputs[0], sample_outputs[2]);

    // render (soft: the heaviest parallel path)
    let mut renders = Vec::new();
    for (tag, threads) in [("a", Some(1)), ("b", Some(4))] {
        let out = dir.file(&format!("render_{tag}.png"));
        let (code, _, stderr) = run_with_threads(
            &[
                "render",
                "--mesh",
                mesh_path.to_str().unwrap(),
                "--out",
                out.to_str().unwrap(),
                "--raster",
                "soft",
                "--shader",
                "lambertian",
                "--size",
                "96x96",
            ],
            threads,
        );
        assert_eq!(code, 0, "{stderr}");
        renders.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(renders[0], renders[1]);

    // convert to an SDF grid (parallel per-cell loops)
    let mut grids = Vec::new();
    for (tag, threads) in [("a", Some(1)), ("b", Some(4))] {
        let out = dir.file(&format!("sdf_{tag}.kvox"));
        let (code, _, stderr) = run_with_threads(
            &[
                "convert",
                "--from",
                "obj",
                "--to",
                "sdf",
                "--resolution",
                "24",
                mesh_path.to_str().unwrap(),
                out.to_str().unwrap(),
            ],
            threads,
        );
        assert_eq!(code, 0, "{stderr}");
        grids.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(grids[0], grids[1]);

    // metric on two generated clouds
    let a = dir.file("pts_a.xyz");
    let b = dir.file("pts_b2.xyz");
    let (code, _, _) = run(&[
        "sample",
        "--mesh",
        mesh_path.to_str().unwrap(),
        "--n",
        "3000",
        "--seed",
        "7",
        "--out",
        b.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let mut metric_lines = Vec::new();
    for threads in [Some(1), Some(4)] {
        let (code, stdout, _) = run_with_threads(
            &["metric", "--kind", "chamfer", a.to_str().unwrap(), b.to_str().unwrap()],
            threads,
        );
        assert_eq!(code, 0);
        metric_lines.push(stdout);
    }
    assert_eq!(metric_lines[0], metric_lines[1]);
}

#[test]
fn full_conversion_chain_through_the_cli() {
    let dir = TempDir::new("chain");
    let mesh_path = dir.file("sphere.obj");
    write_sphere(&mesh_path);

    // obj -> sdf -> obj (marching cubes) -> xyz, then p2s against the
    // reconstruction.
    let sdf = dir.file("s.kvox");
    let (code, _, e) = run(&[
        "convert", "--from", "obj", "--to", "sdf", "--resolution", "32",
        mesh_path.to_str().unwrap(), sdf.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{e}");
    let recon = dir.file("recon.obj");
    let (code, _, e) = run(&[
        "convert", "--from", "sdf", "--to", "obj",
        sdf.to_str().unwrap(), recon.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{e}");
    let pts = dir.file("pts.xyz");
    let (code, _, e) = run(&[
        "convert", "--from", "obj", "--to", "xyz", "--samples", "2000", "--seed", "3",
        mesh_path.to_str().unwrap(), pts.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{e}");
    let (code, stdout, e) = run(&[
        "metric", "--kind", "p2s", pts.to_str().unwrap(), recon.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{e}");
    let value: f64 = stdout.trim().strip_prefix("p2s ").unwrap().parse().unwrap();
    assert!(value < 1e-2, "p2s after round trip: {value}");

    // obj -> kvox -> xyz -> kvox chain.
    let kv = dir.file("v.kvox");
    let (code, _, _) = run(&[
        "convert", "--from", "obj", "--to", "kvox", "--resolution", "16",
        mesh_path.to_str().unwrap(), kv.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let centers = dir.file("centers.xyz");
    let (code, _, _) = run(&[
        "convert", "--from", "kvox", "--to", "xyz",
        kv.to_str().unwrap(), centers.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let kv2 = dir.file("v2.kvox");
    let (code, _, _) = run(&[
        "convert", "--from", "xyz", "--to", "kvox", "--resolution", "16",
        centers.to_str().unwrap(), kv2.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);

    // adjacency stats on the watertight sphere.
    let (code, stdout, _) = run(&["adjacency", "--mesh", mesh_path.to_str().unwrap(), "--stats"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("watertight true"));
    assert!(stdout.contains("euler_characteristic 2"));
}

#[test]
fn parser_accepts_everything_the_writer_produces() {
    // Closure property over 100 random meshes, including colored ones.
    let mut rng = Rng::new(77);
    for trial in 0..100 {
        let level = (trial % 2) as u32;
        let mesh = common::bumpy_sphere(trial as u64, level);
        let mesh = if trial % 3 == 0 {
            let colors: Vec<Vec3> = (0..mesh.num_vertices())
                .map(|_| Vec3::new(rng.uniform(), rng.uniform(), rng.uniform()))
                .collect();
            mesh.with_vertex_colors(colors).unwrap()
        } else {
            mesh
        };
        let text = write_obj(&mesh);
        let back: TriangleMesh = parse_obj(&text).unwrap_or_else(|e| panic!("trial {trial}: {e}"));
        assert_eq!(mesh.vertices(), back.vertices());
        assert_eq!(mesh.faces(), back.faces());
        assert_eq!(mesh.vertex_colors(), back.vertex_colors());
    }
}
