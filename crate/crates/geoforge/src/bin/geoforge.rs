//! Command-line interface: file-to-file conversions, offline rendering,
//! metrics, sampling, adjacency statistics, and gradient checks.
//!
//! Exit codes: 0 success, 1 domain/parse errors, 2 usage errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use geoforge::accel::{build_adjacency, is_watertight, TriangleBvh};
use geoforge::convert;
use geoforge::gradcheck;
use geoforge::io;
use geoforge::math::Vec3;
use geoforge::mesh::TriangleMesh;
use geoforge::metrics;
use geoforge::pointcloud::PointCloud;
use geoforge::render::{
    render, Light, Material, Rasterizer, RenderPipeline, Shader, SoftSettings,
};
use geoforge::transform::{euler_to_rotation, EulerConvention, RigidTransform};
use geoforge::{Camera, GeoError, Intrinsics};

#[derive(Parser)]
#[command(
    name = "geoforge",
    about = "3D geometry kernel: representation conversions, differentiable rendering, metrics",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert between representations (obj, off, kvox, sdf, xyz).
    Convert(ConvertArgs),
    /// Render a mesh to a PNG image.
    Render(RenderArgs),
    /// Compute a metric between two files and print `name value`.
    Metric(MetricArgs),
    /// Verify an operation's analytic gradients against finite differences.
    Gradcheck(GradcheckArgs),
    /// Sample points uniformly on a mesh surface.
    Sample(SampleArgs),
    /// Build mesh adjacency and optionally print statistics.
    Adjacency(AdjacencyArgs),
}

#[derive(Args)]
struct ConvertArgs {
    /// Source format: obj | off | kvox | sdf | xyz.
    #[arg(long)]
    from: String,
    /// Target format: obj | off | kvox | sdf | xyz.
    #[arg(long)]
    to: String,
    /// Grid resolution per axis for voxel/sdf targets.
    #[arg(long, default_value_t = 32)]
    resolution: usize,
    /// Fill the interior when voxelizing (requires a watertight mesh).
    #[arg(long)]
    solid: bool,
    /// Sample count for mesh -> pointcloud conversion.
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    /// Seed for the deterministic sampler.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Extra world-space padding around the bounding box for sdf grids.
    #[arg(long, default_value_t = 0.0)]
    padding: f64,
    /// Occupancy threshold for voxel sources.
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    input: PathBuf,
    output: PathBuf,
}

#[derive(Args)]
struct RenderArgs {
    /// Input mesh (obj or off).
    #[arg(long)]
    mesh: PathBuf,
    /// Output PNG path.
    #[arg(long)]
    out: PathBuf,
    /// Rasterizer: hard | soft | dib.
    #[arg(long, default_value = "hard")]
    raster: String,
    /// Shader: lambertian | phong | cosine | unlit.
    #[arg(long, default_value = "lambertian")]
    shader: String,
    /// Camera pose "rx,ry,rz,tx,ty,tz": intrinsic XYZ Euler angles
    /// (radians) plus translation of the world-to-camera transform.
    /// Defaults to an automatic framing of the mesh.
    #[arg(long)]
    camera: Option<String>,
    /// Image size as WxH.
    #[arg(long, default_value = "256x256")]
    size: String,
    /// Soft rasterizer distance bandwidth (squared pixels).
    #[arg(long, default_value_t = 0.25)]
    sigma: f64,
    /// Soft rasterizer depth-aggregation temperature.
    #[arg(long, default_value_t = 0.01)]
    gamma: f64,
    /// DIB background decay length in pixels.
    #[arg(long, default_value_t = 1.0)]
    alpha_delta: f64,
    /// Directional light direction "dx,dy,dz" (world frame, toward the
    /// light).
    #[arg(long)]
    light: Option<String>,
    /// Use an orthographic camera instead of a pinhole.
    #[arg(long)]
    ortho: bool,
    /// Background color "r,g,b" in [0,1].
    #[arg(long, default_value = "0,0,0")]
    background: String,
}

#[derive(Args)]
struct MetricArgs {
    /// Metric: chamfer | emd | iou | p2s.
    #[arg(long)]
    kind: String,
    /// Auction accuracy for emd.
    #[arg(long, default_value_t = 1e-4)]
    epsilon: f64,
    /// Occupancy threshold for iou.
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    a: PathBuf,
    b: PathBuf,
}

#[derive(Args)]
struct GradcheckArgs {
    /// Operation name; `--op list` prints the registry.
    #[arg(long)]
    op: String,
    /// Override the pass tolerance on the relative error.
    #[arg(long)]
    tol: Option<f64>,
    /// Override the probe count.
    #[arg(long)]
    probes: Option<usize>,
    /// Seed for probe directions.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    mesh: PathBuf,
    /// Number of points.
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output pointcloud (.xyz) path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AdjacencyArgs {
    #[arg(long)]
    mesh: PathBuf,
    /// Print connectivity statistics.
    #[arg(long)]
    stats: bool,
}

enum CliError {
    Usage(String),
    Geo(GeoError),
}

impl From<GeoError> for CliError {
    fn from(e: GeoError) -> CliError {
        CliError::Geo(e)
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Geo(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Convert(args) => run_convert(args),
        Command::Render(args) => run_render(args),
        Command::Metric(args) => run_metric(args),
        Command::Gradcheck(args) => run_gradcheck(args),
        Command::Sample(args) => run_sample(args),
        Command::Adjacency(args) => run_adjacency(args),
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Format {
    Obj,
    Off,
    Kvox,
    Sdf,
    Xyz,
}

fn parse_format(tag: &str) -> Result<Format, CliError> {
    match tag.to_ascii_lowercase().as_str() {
        "obj" => Ok(Format::Obj),
        "off" => Ok(Format::Off),
        "kvox" => Ok(Format::Kvox),
        "sdf" => Ok(Format::Sdf),
        "xyz" => Ok(Format::Xyz),
        other => Err(usage(format!("unknown format {other:?} (obj, off, kvox, sdf, xyz)"))),
    }
}

fn run_convert(args: ConvertArgs) -> Result<(), CliError> {
    let from = parse_format(&args.from)?;
    let to = parse_format(&args.to)?;
    let res = args.resolution;
    if res == 0 {
        return Err(usage("--resolution must be at least 1"));
    }
    let resolution = (res, res, res);

    let load_mesh_input = |path: &Path| -> Result<TriangleMesh, CliError> { Ok(io::load_mesh(path)?) };
    let load_occupancy = |path: &Path| -> Result<geoforge::VoxelGrid, CliError> {
        match io::load_grid(path)? {
            io::GridFile::Occupancy(g) => Ok(g),
            io::GridFile::Sdf(_) => Err(usage("input is an sdf grid; pass --from sdf")),
        }
    };
    let load_sdf = |path: &Path| -> Result<geoforge::SdfGrid, CliError> {
        match io::load_grid(path)? {
            io::GridFile::Sdf(g) => Ok(g),
            io::GridFile::Occupancy(_) => Err(usage("input is an occupancy grid; pass --from kvox")),
        }
    };

    match (from, to) {
        (Format::Obj | Format::Off, Format::Obj | Format::Off) => {
            let mesh = load_mesh_input(&args.input)?;
            io::save_mesh(&args.output, &mesh)?;
        }
        (Format::Obj | Format::Off, Format::Kvox) => {
            let mesh = load_mesh_input(&args.input)?;
            let mode = if args.solid {
                convert::VoxelizeMode::Solid
            } else {
                convert::VoxelizeMode::Surface
            };
            let grid = convert::voxelize_mesh(&mesh, resolution, mode)?;
            io::save_grid(&args.output, &io::GridFile::Occupancy(grid))?;
        }
        (Format::Obj | Format::Off, Format::Sdf) => {
            let mesh = load_mesh_input(&args.input)?;
            let sdf = convert::mesh_to_sdfgrid(&mesh, resolution, args.padding)?;
            io::save_grid(&args.output, &io::GridFile::Sdf(sdf))?;
        }
        (Format::Obj | Format::Off, Format::Xyz) => {
            let mesh = load_mesh_input(&args.input)?;
            let sampled = convert::sample_points_on_mesh(&mesh, args.samples, args.seed)?;
            let cloud = PointCloud::new(sampled.points).expect("sampled points are finite");
            io::save_pointcloud(&args.output, &cloud)?;
        }
        (Format::Kvox, Format::Obj | Format::Off) => {
            let grid = load_occupancy(&args.input)?;
            let mesh = convert::voxel_to_mesh(&grid, args.threshold)?;
            io::save_mesh(&args.output, &mesh)?;
        }
        (Format::Sdf, Format::Obj | Format::Off) => {
            let sdf = load_sdf(&args.input)?;
            let mesh = convert::sdfgrid_to_mesh(&sdf, 0.0)?;
            io::save_mesh(&args.output, &mesh)?;
        }
        (Format::Xyz, Format::Kvox) => {
            let cloud = io::load_pointcloud(&args.input)?;
            let grid = convert::pointcloud_to_voxel(&cloud, resolution)?;
            io::save_grid(&args.output, &io::GridFile::Occupancy(grid))?;
        }
        (Format::Kvox, Format::Xyz) => {
            let grid = load_occupancy(&args.input)?;
            let cloud = convert::voxel_to_pointcloud(&grid, args.threshold)?;
            io::save_pointcloud(&args.output, &cloud)?;
        }
        _ => {
            return Err(usage(format!(
                "no conversion from {} to {}",
                args.from, args.to
            )))
        }
    }
    Ok(())
}

fn parse_triple(text: &str, what: &str) -> Result<Vec3, CliError> {
    let nums: Vec<f64> = text
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| usage(format!("bad number {s:?} in {what}")))
        })
        .collect::<Result<_, _>>()?;
    if nums.len() != 3 {
        return Err(usage(format!("{what} needs 3 comma-separated numbers")));
    }
    Ok(Vec3::new(nums[0], nums[1], nums[2]))
}

fn parse_size(text: &str) -> Result<(usize, usize), CliError> {
    let parts: Vec<&str> = text.split(['x', 'X']).collect();
    if parts.len() != 2 {
        return Err(usage("--size must look like 256x256"));
    }
    let w = parts[0].parse().map_err(|_| usage("bad width"))?;
    let h = parts[1].parse().map_err(|_| usage("bad height"))?;
    if w == 0 || h == 0 {
        return Err(usage("image size must be positive"));
    }
    Ok((w, h))
}

fn run_render(args: RenderArgs) -> Result<(), CliError> {
    let mesh = io::load_mesh(&args.mesh)?;
    let (width, height) = parse_size(&args.size)?;

    let extrinsics = match &args.camera {
        Some(text) => {
            let nums: Vec<f64> = text
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| usage(format!("bad number {s:?} in --camera")))
                })
                .collect::<Result<_, _>>()?;
            if nums.len() != 6 {
                return Err(usage("--camera needs rx,ry,rz,tx,ty,tz"));
            }
            let rotation =
                euler_to_rotation(Vec3::new(nums[0], nums[1], nums[2]), EulerConvention::Xyz)?;
            RigidTransform::new(rotation, Vec3::new(nums[3], nums[4], nums[5]))?
        }
        None => {
            // Auto-framing: the bounding-box center lands on the optical
            // axis at 2.5 radii.
            let bb = mesh.bounding_box();
            if bb.is_empty() {
                return Err(CliError::Geo(GeoError::Domain("cannot frame an empty mesh".into())));
            }
            let radius = (bb.extent().norm() / 2.0).max(1e-6);
            RigidTransform::from_translation(Vec3::new(0.0, 0.0, 2.5 * radius) - bb.center())
        }
    };

    let radius_hint = {
        let bb = mesh.bounding_box();
        if bb.is_empty() {
            1.0
        } else {
            (bb.extent().norm() / 2.0).max(1e-6)
        }
    };
    let intrinsics = if args.ortho {
        Intrinsics::Orthographic {
            scale_x: 2.4 * radius_hint / width.min(height) as f64,
            scale_y: 2.4 * radius_hint / width.min(height) as f64,
            cx: width as f64 / 2.0,
            cy: height as f64 / 2.0,
        }
    } else {
        let f = width.max(height) as f64;
        Intrinsics::Pinhole {
            fx: f,
            fy: f,
            cx: width as f64 / 2.0,
            cy: height as f64 / 2.0,
        }
    };
    let camera = Camera::new(extrinsics, intrinsics, (width, height))?;

    let shader = match args.shader.to_ascii_lowercase().as_str() {
        "lambertian" => Shader::Lambertian,
        "phong" => Shader::Phong,
        "cosine" => Shader::Cosine,
        "unlit" => Shader::Unlit,
        other => return Err(usage(format!("unknown shader {other:?}"))),
    };
    let rasterizer = match args.raster.to_ascii_lowercase().as_str() {
        "hard" => Rasterizer::Hard,
        "soft" => Rasterizer::Soft(SoftSettings {
            sigma: args.sigma,
            gamma: args.gamma,
            background_eps: 1e-3,
        }),
        "dib" => Rasterizer::Dib {
            alpha_delta: args.alpha_delta,
        },
        other => return Err(usage(format!("unknown rasterizer {other:?}"))),
    };

    let mut lights = Vec::new();
    if shader != Shader::Unlit {
        let direction = match &args.light {
            Some(text) => parse_triple(text, "--light")?,
            // Default: over the viewer's shoulder.
            None => Vec3::new(0.3, -0.4, -1.0),
        };
        lights.push(Light::ambient(Vec3::splat(0.05)));
        lights.push(
            Light::directional(Vec3::splat(0.95), direction)?
                .with_specular(Vec3::splat(0.4), 32.0)?,
        );
    }

    let background = parse_triple(&args.background, "--background")?;
    let pipeline = RenderPipeline::new(camera, rasterizer, shader, lights, background)?;
    let out = render(&pipeline, &mesh, Material::VertexColors)?;
    io::write_png_rgba(&out.color, &out.alpha, &args.out)?;
    Ok(())
}

/// Points for metrics: .xyz files directly, meshes by their vertex set.
fn metric_points(path: &Path) -> Result<PointCloud, CliError> {
    match io::extension(path).as_str() {
        "xyz" => Ok(io::load_pointcloud(path)?),
        _ => {
            let mesh = io::load_mesh(path)?;
            Ok(PointCloud::new(mesh.vertices().to_vec())?)
        }
    }
}

fn print_metric(name: &str, value: f64) {
    println!("{name} {value:.12}");
}

fn run_metric(args: MetricArgs) -> Result<(), CliError> {
    match args.kind.to_ascii_lowercase().as_str() {
        "chamfer" => {
            let a = metric_points(&args.a)?;
            let b = metric_points(&args.b)?;
            print_metric("chamfer", metrics::chamfer_distance(&a, &b)?.value);
        }
        "emd" => {
            let a = metric_points(&args.a)?;
            let b = metric_points(&args.b)?;
            print_metric("emd", metrics::emd_approx(&a, &b, args.epsilon)?.cost);
        }
        "iou" => {
            let ga = match io::load_grid(&args.a)? {
                io::GridFile::Occupancy(g) => g,
                io::GridFile::Sdf(_) => return Err(usage("iou expects occupancy grids")),
            };
            let gb = match io::load_grid(&args.b)? {
                io::GridFile::Occupancy(g) => g,
                io::GridFile::Sdf(_) => return Err(usage("iou expects occupancy grids")),
            };
            print_metric("iou", metrics::voxel_iou(&ga, &gb, args.threshold)?);
        }
        "p2s" => {
            let points = metric_points(&args.a)?;
            let mesh = io::load_mesh(&args.b)?;
            let bvh = TriangleBvh::build(&mesh)?;
            print_metric("p2s", metrics::point_to_surface(points.points(), &bvh)?.value);
        }
        other => return Err(usage(format!("unknown metric {other:?} (chamfer, emd, iou, p2s)"))),
    }
    Ok(())
}

fn run_gradcheck(args: GradcheckArgs) -> Result<(), CliError> {
    if args.op == "list" {
        for name in gradcheck::ops::registry_names() {
            println!("{name}");
        }
        return Ok(());
    }
    let check = gradcheck::ops::registry(&args.op).map_err(|e| match e {
        GeoError::Config(msg) => usage(msg),
        other => CliError::Geo(other),
    })?;
    let tol = args.tol.unwrap_or(check.tol);
    let probes = args.probes.unwrap_or(check.probes);
    let report = gradcheck::check_vjp(&*check.op, &check.inputs, probes, check.eps, tol, args.seed)?;
    for (i, probe) in report.probes.iter().enumerate() {
        if probe.skipped {
            println!("probe {i:2} skipped (discontinuity)");
        } else {
            println!(
                "probe {i:2} analytic {:+.9e} fd {:+.9e} rel {:.3e} {}",
                probe.analytic,
                probe.finite_difference,
                probe.relative_error,
                if probe.passed { "ok" } else { "FAIL" }
            );
        }
    }
    println!(
        "op {} probes {} failures {} skipped {} max_rel {:.3e} linearity {:.3e}",
        report.op_name,
        report.probes.len(),
        report.failures,
        report.skipped,
        report.max_relative_error,
        report.linearity_error
    );
    if report.failures > 0 {
        return Err(CliError::Geo(GeoError::Domain(format!(
            "{} gradient probes failed",
            report.failures
        ))));
    }
    Ok(())
}

fn run_sample(args: SampleArgs) -> Result<(), CliError> {
    let mesh = io::load_mesh(&args.mesh)?;
    let sampled = convert::sample_points_on_mesh(&mesh, args.n, args.seed)?;
    let cloud = PointCloud::new(sampled.points).expect("sampled points are finite");
    io::save_pointcloud(&args.out, &cloud)?;
    Ok(())
}

fn run_adjacency(args: AdjacencyArgs) -> Result<(), CliError> {
    let mesh = io::load_mesh(&args.mesh)?;
    let adjacency = build_adjacency(&mesh)?;
    if args.stats {
        let boundary = adjacency
            .edges()
            .iter()
            .enumerate()
            .filter(|(e, _)| adjacency.edge_faces(*e).len() == 1)
            .count();
        println!("vertices {}", mesh.num_vertices());
        println!("edges {}", adjacency.num_edges());
        println!("faces {}", mesh.num_faces());
        println!("boundary_edges {boundary}");
        println!("watertight {}", is_watertight(&adjacency));
        println!(
            "euler_characteristic {}",
            mesh.num_vertices() as i64 - adjacency.num_edges() as i64 + mesh.num_faces() as i64
        );
    }
    Ok(())
}
