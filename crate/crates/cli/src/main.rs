//! Command-line front end for the `sdfield` toolkit.
//!
//! Exit codes: 0 success, 2 input or parse failure, 3 invalid arguments or
//! configuration, 4 numeric failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sdfield::camera::io::{load_correspondences, load_pose, save_pose};
use sdfield::camera::{fit_pose, pose_metrics, CameraPose, FitOptions, Intrinsics};
use sdfield::config::RunConfig;
use sdfield::encoder::{encode_image, Image};
use sdfield::extraction::{evaluate_field, marching_cubes_with, IsoSurfaceConfig};
use sdfield::geometry::io::{load_grid, load_mesh, save_grid, save_obj, save_points};
use sdfield::geometry::shapes::AnalyticShape;
use sdfield::geometry::{build_sdf_grid, normalize_mesh, render_depth_image, sample_training_points, Aabb, SdfGrid};
use sdfield::metrics::{evaluate_meshes, EmdOptions, EvalOptions, DEFAULT_EMD_CAP};
use sdfield::pipeline::{run_fit, ShapeSource, ViewSpec};
use sdfield::regressor::io::{load_model, save_loss_log, save_model};
use sdfield::{Error, Result, Vec3};

#[derive(Parser)]
#[command(name = "sdfield", version, about = "Single-view implicit surface reconstruction toolkit")]
struct Cli {
    /// Worker threads for data-parallel stages (1 runs everything serially).
    #[arg(long, global = true, env = "SDFIELD_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a signed distance grid from an OBJ or PLY mesh.
    Sdfgen(SdfgenArgs),
    /// Draw Gaussian-weighted training points from a grid.
    Sample(SampleArgs),
    /// Sample, train a model and write it with its loss log.
    Fit(FitArgs),
    /// Recover a camera pose from 3D correspondences.
    PoseFit(PoseFitArgs),
    /// Extract a mesh from a trained model and a depth image.
    Reconstruct(ReconstructArgs),
    /// Compare two meshes with chamfer distance, EMD and voxel IoU.
    Eval(EvalArgs),
    /// Render a normalized 16-bit depth image.
    RenderDepth(RenderArgs),
}

#[derive(Args)]
struct SdfgenArgs {
    /// Input mesh (.obj or .ply).
    mesh: PathBuf,
    /// Lattice points per axis.
    #[arg(long, default_value_t = 64)]
    resolution: usize,
    /// Output grid file.
    #[arg(long, short)]
    out: PathBuf,
    /// Scale and center the mesh into the unit cube first, keeping this
    /// margin on each side.
    #[arg(long)]
    normalize: Option<f64>,
    /// Half edge length of the cubic grid box centered at the origin.
    #[arg(long, default_value_t = 0.5)]
    half_extent: f64,
}

#[derive(Args)]
struct SampleArgs {
    /// Input grid file.
    grid: PathBuf,
    #[arg(long, default_value_t = 2048)]
    count: usize,
    /// Standard deviation of the Gaussian weight on the signed distance.
    #[arg(long, default_value_t = 0.1)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output text file with `x y z s` lines.
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct FitArgs {
    /// Run configuration file.
    config: PathBuf,
}

#[derive(Args)]
struct PoseFitArgs {
    /// Correspondence file with `xw yw zw xc yc zc` lines.
    correspondences: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    restarts: usize,
    #[arg(long, default_value_t = 2000)]
    steps: usize,
    /// Ground-truth pose file; prints the 3D and 2D pose errors.
    #[arg(long)]
    gt_pose: Option<PathBuf>,
    #[command(flatten)]
    intrinsics: IntrinsicsArgs,
    /// Output pose file.
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args, Clone, Copy)]
struct IntrinsicsArgs {
    /// Focal length in pixels (default: image width).
    #[arg(long)]
    focal: Option<f64>,
    /// Principal point x (default: width / 2).
    #[arg(long)]
    cx: Option<f64>,
    /// Principal point y (default: height / 2).
    #[arg(long)]
    cy: Option<f64>,
    #[arg(long, default_value_t = 128)]
    width: usize,
    #[arg(long, default_value_t = 128)]
    height: usize,
}

impl IntrinsicsArgs {
    fn build(&self, width: usize, height: usize) -> Result<Intrinsics> {
        Intrinsics::new(
            self.focal.unwrap_or(width as f64),
            self.cx.unwrap_or(width as f64 / 2.0),
            self.cy.unwrap_or(height as f64 / 2.0),
            width,
            height,
        )
    }
}

#[derive(Args)]
struct ReconstructArgs {
    #[arg(long)]
    model: PathBuf,
    /// Depth image (PGM).
    #[arg(long)]
    image: PathBuf,
    /// Camera pose file.
    #[arg(long, conflicts_with = "fit_pose")]
    pose: Option<PathBuf>,
    /// Estimate the pose from `--correspondences` instead of reading it.
    #[arg(long)]
    fit_pose: bool,
    #[arg(long)]
    correspondences: Option<PathBuf>,
    #[arg(long, default_value_t = 64)]
    resolution: usize,
    #[arg(long, default_value_t = 0.0)]
    iso: f64,
    #[arg(long, default_value_t = 0.5)]
    half_extent: f64,
    /// Also write the evaluated field as a grid file.
    #[arg(long)]
    grid_out: Option<PathBuf>,
    /// Seed for the pose-fitting restarts.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    intrinsics: IntrinsicsArgs,
    /// Output OBJ.
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    /// Predicted mesh.
    mesh_a: PathBuf,
    /// Reference mesh.
    mesh_b: PathBuf,
    #[arg(long, default_value_t = 2048)]
    points: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 32)]
    iou_res: usize,
    /// Largest cloud size for the exact EMD solver.
    #[arg(long, default_value_t = DEFAULT_EMD_CAP)]
    emd_cap: usize,
    /// Above the cap, report a greedy EMD with its suboptimality bound.
    #[arg(long)]
    emd_approx: bool,
    /// Also print the scaled table (CD x1e-3, EMD x1e-2, IoU %).
    #[arg(long)]
    table: bool,
}

#[derive(Args)]
struct RenderArgs {
    /// Built-in analytic shape (sphere, cube, torus, torus_bump).
    #[arg(long, group = "source")]
    shape: Option<String>,
    /// Mesh file; its SDF grid is built first.
    #[arg(long, group = "source")]
    mesh: Option<PathBuf>,
    /// Existing grid file.
    #[arg(long, group = "source")]
    grid: Option<PathBuf>,
    /// Grid resolution for `--shape` and `--mesh`.
    #[arg(long, default_value_t = 64)]
    resolution: usize,
    #[arg(long, default_value_t = 0.5)]
    half_extent: f64,
    #[arg(long, value_parser = parse_vec3, default_value = "0.5,-0.6,1.3")]
    eye: Vec3,
    #[arg(long, value_parser = parse_vec3, default_value = "0,0,0")]
    target: Vec3,
    #[arg(long, value_parser = parse_vec3, default_value = "0,1,0")]
    up: Vec3,
    #[command(flatten)]
    intrinsics: IntrinsicsArgs,
    /// Output PGM.
    #[arg(long, short)]
    out: PathBuf,
    /// Also write the camera pose.
    #[arg(long)]
    pose_out: Option<PathBuf>,
}

fn parse_vec3(s: &str) -> std::result::Result<Vec3, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    match v.as_slice() {
        [x, y, z] => Ok(Vec3::new(*x, *y, *z)),
        _ => Err("expected x,y,z".into()),
    }
}

fn exit_code(e: &Error) -> u8 {
    if e.is_input_error() {
        2
    } else if e.is_numeric_error() {
        4
    } else {
        3
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let parallel = configure_threads(cli.threads);
    let result = match cli.command {
        Command::Sdfgen(a) => cmd_sdfgen(&a, parallel),
        Command::Sample(a) => cmd_sample(&a),
        Command::Fit(a) => cmd_fit(&a, parallel),
        Command::PoseFit(a) => cmd_pose_fit(&a, parallel),
        Command::Reconstruct(a) => cmd_reconstruct(&a, parallel),
        Command::Eval(a) => cmd_eval(&a),
        Command::RenderDepth(a) => cmd_render(&a, parallel),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// Sizes the worker pool; returns whether data-parallel paths should run.
fn configure_threads(threads: Option<usize>) -> bool {
    match threads {
        Some(0) | None => sdfield::par::parallel_available(),
        Some(1) => false,
        #[cfg(feature = "parallel")]
        Some(n) => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                eprintln!("warning: could not size the thread pool: {e}");
            }
            true
        }
        #[cfg(not(feature = "parallel"))]
        Some(_) => false,
    }
}

fn cmd_sdfgen(a: &SdfgenArgs, parallel: bool) -> Result<()> {
    if a.resolution < 2 {
        return Err(Error::InvalidResolution(a.resolution));
    }
    let mut mesh = load_mesh(&a.mesh)?;
    if let Some(margin) = a.normalize {
        mesh = normalize_mesh(&mesh, margin)?.0;
    }
    if mesh.is_empty() {
        return Err(Error::InvalidMesh("mesh has no faces".into()));
    }
    let grid = build_sdf_grid(&mesh, a.resolution, Aabb::cube(a.half_extent), parallel)?;
    save_grid(&a.out, &grid)?;
    println!(
        "resolution={} min={} max={} negative_percent={:.3}",
        a.resolution,
        grid.min_value(),
        grid.max_value(),
        100.0 * grid.negative_fraction()
    );
    Ok(())
}

fn cmd_sample(a: &SampleArgs) -> Result<()> {
    let grid = load_grid(&a.grid)?;
    let samples = sample_training_points(&grid, a.count, a.sigma, a.seed)?;
    save_points(&a.out, &samples)?;
    println!("samples={}", samples.len());
    Ok(())
}

fn cmd_fit(a: &FitArgs, parallel: bool) -> Result<()> {
    let cfg = RunConfig::load(&a.config)?;
    cfg.validate()?;
    let out = run_fit(&cfg, parallel)?;
    save_model(&cfg.model_out, &out.model)?;
    save_loss_log(&cfg.loss_log_out, &out.loss_log)?;
    if let Some(p) = &cfg.image_out {
        out.prepared.scene.image.save_pgm(p)?;
    }
    if let Some(p) = &cfg.pose_out {
        save_pose(p, &out.prepared.scene.pose)?;
    }
    if let Some(p) = &cfg.reference_out {
        save_obj(p, &out.prepared.shape.reference_mesh(cfg.bbox())?)?;
    }
    let h = &out.held_out;
    println!("iterations={}", out.loss_log.len());
    println!("held_out_points={}", h.n);
    println!("held_out_mean_abs_error={}", h.mean_abs_error);
    println!("held_out_mean_loss={}", h.mean_loss);
    println!("held_out_sign_accuracy={}", h.sign_accuracy);
    println!("final_loss={}", out.loss_log.last().copied().unwrap_or(f64::NAN));
    Ok(())
}

fn cmd_pose_fit(a: &PoseFitArgs, parallel: bool) -> Result<()> {
    let (world, cam) = load_correspondences(&a.correspondences)?;
    let opts = FitOptions { restarts: a.restarts, max_steps: a.steps, parallel, ..FitOptions::default() };
    let fit = fit_pose(&world, &cam, a.seed, &opts)?;
    save_pose(&a.out, &fit.pose)?;
    println!("loss={}", fit.loss);
    println!("restart={}", fit.restart);
    if let Some(gt) = &a.gt_pose {
        let gt = load_pose(gt)?;
        let intr = a.intrinsics.build(a.intrinsics.width, a.intrinsics.height)?;
        let m = pose_metrics(&fit.pose, &gt, &world, &intr)?;
        println!("d3d={}", m.d3d);
        println!("d2d={}", m.d2d);
    }
    Ok(())
}

fn reconstruct_pose(a: &ReconstructArgs, parallel: bool) -> Result<CameraPose> {
    if a.fit_pose {
        let Some(c) = &a.correspondences else {
            return Err(Error::InvalidParameter("--fit-pose needs --correspondences".into()));
        };
        let opts = FitOptions { parallel, ..FitOptions::default() };
        let (world, cam) = load_correspondences(c)?;
        return Ok(fit_pose(&world, &cam, a.seed, &opts)?.pose);
    }
    match &a.pose {
        Some(p) => load_pose(p),
        None => Err(Error::InvalidParameter("give --pose or --fit-pose".into())),
    }
}

fn cmd_reconstruct(a: &ReconstructArgs, parallel: bool) -> Result<()> {
    let pose = reconstruct_pose(a, parallel)?;
    let model = load_model(&a.model)?;
    let image = Image::load_pgm(&a.image)?;
    let intr = a.intrinsics.build(image.width(), image.height())?;
    let cfg = IsoSurfaceConfig { resolution: a.resolution, iso_value: a.iso, bbox: Aabb::cube(a.half_extent) };
    let stack = encode_image(&image, &model.encoder)?;
    let field = evaluate_field(&model, &stack, &pose, &intr, &cfg, parallel)?;
    if let Some(p) = &a.grid_out {
        save_grid(p, &field.grid)?;
    }
    if field.projection_failures > 0 {
        eprintln!(
            "warning: {} lattice points could not be projected; used the principal point",
            field.projection_failures
        );
    }
    let mesh = marching_cubes_with(&field.grid, cfg.iso_value, parallel);
    if mesh.is_empty() {
        eprintln!("warning: the field has no crossing of the iso value; writing an empty mesh");
    }
    save_obj(&a.out, &mesh)?;
    println!("vertices={}", mesh.vertices().len());
    println!("triangles={}", mesh.faces().len());
    Ok(())
}

fn cmd_eval(a: &EvalArgs) -> Result<()> {
    let pred = load_mesh(&a.mesh_a)?;
    let reference = load_mesh(&a.mesh_b)?;
    let opts = EvalOptions {
        n_points: a.points,
        seed: a.seed,
        iou_resolution: a.iou_res,
        emd: EmdOptions { cap: a.emd_cap, approximate: a.emd_approx },
    };
    let report = evaluate_meshes(&pred, &reference, &opts)?;
    print!("{}", report.to_key_values());
    if a.table {
        print!("{}", report.table());
    }
    Ok(())
}

fn render_grid(a: &RenderArgs, parallel: bool) -> Result<SdfGrid> {
    let bbox = Aabb::cube(a.half_extent);
    if let Some(p) = &a.grid {
        return load_grid(p);
    }
    if let Some(p) = &a.mesh {
        return build_sdf_grid(&load_mesh(p)?, a.resolution, bbox, parallel);
    }
    let name = a.shape.as_deref().unwrap_or("sphere");
    let shape =
        AnalyticShape::by_name(name).ok_or_else(|| Error::InvalidParameter(format!("unknown shape `{name}`")))?;
    ShapeSource::Analytic(shape).grid(a.resolution, bbox, parallel)
}

fn cmd_render(a: &RenderArgs, parallel: bool) -> Result<()> {
    let grid = render_grid(a, parallel)?;
    let intr = a.intrinsics.build(a.intrinsics.width, a.intrinsics.height)?;
    let view = ViewSpec { eye: a.eye, target: a.target, up: a.up, intrinsics: intr };
    let pose = view.pose()?;
    let depth = render_depth_image(&grid, &pose, &intr, intr.width, intr.height)?;
    let (near, far) = view.depth_range(&grid.bbox());
    let image = depth.normalized_depth(near, far).quantized_u16();
    image.save_pgm(&a.out)?;
    if let Some(p) = &a.pose_out {
        save_pose(p, &pose)?;
    }
    let hits = image.pixels().iter().filter(|&&v| v > 0.0).count();
    println!("width={} height={} foreground_pixels={hits}", intr.width, intr.height);
    Ok(())
}
