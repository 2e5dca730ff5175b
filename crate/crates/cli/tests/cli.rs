use std::path::Path;
use std::process::{Command, Output};

use sdfield::camera::io::{format_correspondences, load_pose, save_pose};
use sdfield::camera::CameraPose;
use sdfield::config::RunConfig;
use sdfield::encoder::Image;
use sdfield::geometry::io::{load_mesh, save_obj};
use sdfield::geometry::shapes::{cube, unit_cube};
use sdfield::pipeline::model_config;
use sdfield::regressor::io::{load_loss_log, load_model, save_model};
use sdfield::regressor::{ModelConfig, SdfModel};
use sdfield::Vec3;
use tempfile::TempDir;

fn sdfield(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sdfield")).args(args).env_remove("SDFIELD_THREADS").output().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn value(out: &str, key: &str) -> f64 {
    out.split_whitespace()
        .find_map(|tok| tok.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("no `{key}` in {out}"))
        .parse()
        .unwrap()
}

fn write_cube(dir: &TempDir, name: &str, offset: f64) -> std::path::PathBuf {
    let path = dir.path().join(name);
    let m = cube(Vec3::new(-0.25 + offset, -0.25, -0.25), Vec3::new(0.25 + offset, 0.25, 0.25));
    save_obj(&path, &m).unwrap();
    path
}

#[test]
fn help_lists_every_subcommand() {
    let out = stdout(&sdfield(&["--help"]));
    for cmd in ["sdfgen", "sample", "fit", "pose-fit", "reconstruct", "eval", "render-depth", "--threads"] {
        assert!(out.contains(cmd), "{cmd} missing from help");
    }
}

#[test]
fn sdfgen_file_size_and_stats() {
    let dir = TempDir::new().unwrap();
    let mesh = dir.path().join("cube.obj");
    save_obj(&mesh, &unit_cube()).unwrap();
    let grid = dir.path().join("cube.sdfg");
    let o = sdfield(&["sdfgen", p(&mesh), "--resolution", "32", "-o", p(&grid)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(std::fs::metadata(&grid).unwrap().len(), 4 + 4 + 12 + 24 + 4 * 32 * 32 * 32);
    let out = stdout(&o);
    assert!(value(&out, "min") < 0.0 && value(&out, "max") > 0.0);
    assert!(value(&out, "negative_percent") > 0.0);
}

#[test]
fn sdfgen_thread_count_does_not_change_output() {
    let dir = TempDir::new().unwrap();
    let mesh = dir.path().join("cube.obj");
    save_obj(&mesh, &unit_cube()).unwrap();
    let (a, b) = (dir.path().join("a.sdfg"), dir.path().join("b.sdfg"));
    assert!(sdfield(&["--threads", "1", "sdfgen", p(&mesh), "--resolution", "12", "-o", p(&a)]).status.success());
    assert!(sdfield(&["sdfgen", p(&mesh), "--resolution", "12", "-o", p(&b)]).status.success());
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn sdfgen_error_codes() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("x.sdfg");
    let missing = sdfield(&["sdfgen", p(&dir.path().join("nope.obj")), "-o", p(&out)]);
    assert_eq!(missing.status.code(), Some(2));

    let mesh = dir.path().join("cube.obj");
    save_obj(&mesh, &unit_cube()).unwrap();
    let res1 = sdfield(&["sdfgen", p(&mesh), "--resolution", "1", "-o", p(&out)]);
    assert_eq!(res1.status.code(), Some(3));

    let bad = dir.path().join("bad.obj");
    std::fs::write(&bad, "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 zz\n").unwrap();
    let parse = sdfield(&["sdfgen", p(&bad), "-o", p(&out)]);
    assert_eq!(parse.status.code(), Some(2));
    assert!(stderr(&parse).contains('4'), "message should name the line: {}", stderr(&parse));
}

#[test]
fn sample_writes_requested_count() {
    let dir = TempDir::new().unwrap();
    let mesh = dir.path().join("cube.obj");
    save_obj(&mesh, &unit_cube()).unwrap();
    let grid = dir.path().join("g.sdfg");
    assert!(sdfield(&["sdfgen", p(&mesh), "--resolution", "16", "-o", p(&grid)]).status.success());
    let pts = dir.path().join("pts.txt");
    let o = sdfield(&["sample", p(&grid), "--count", "100", "--seed", "3", "-o", p(&pts)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(value(&stdout(&o), "samples"), 100.0);
    let again = dir.path().join("pts2.txt");
    assert!(sdfield(&["sample", p(&grid), "--count", "100", "--seed", "3", "-o", p(&again)]).status.success());
    assert_eq!(std::fs::read(pts).unwrap(), std::fs::read(again).unwrap());
}

fn small_config(dir: &TempDir, extra: &str) -> std::path::PathBuf {
    let path = dir.path().join("run.cfg");
    let text = format!(
        "# tiny run\nshape = sphere\ngrid.resolution = 16\ncamera.width = 32\ncamera.height = 32\n\
         sampling.count = 64\neval.held_out = 32\noutput.image = depth.pgm\n{extra}"
    );
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn zero_iteration_fit_keeps_initialization() {
    let dir = TempDir::new().unwrap();
    let cfg_path = small_config(
        &dir,
        "train.iterations = 0\nmodel.seed = 5\noutput.pose = pose.txt\noutput.reference = ref.obj\n",
    );
    let o = sdfield(&["fit", p(&cfg_path)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(value(&out, "iterations"), 0.0);
    assert!(out.contains("final_loss="));

    let cfg = RunConfig::load(&cfg_path).unwrap();
    let image = Image::load_pgm(&dir.path().join("depth.pgm")).unwrap();
    let expected = SdfModel::init(&model_config(&cfg, &image), 5);
    assert_eq!(load_model(&cfg.model_out).unwrap(), expected);
    assert!(load_loss_log(&cfg.loss_log_out).unwrap().is_empty());
    assert!(load_pose(&dir.path().join("pose.txt")).is_ok());
    assert!(!load_mesh(&dir.path().join("ref.obj")).unwrap().is_empty());
}

#[test]
fn short_fit_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let cfg_path = small_config(&dir, "train.iterations = 3\ntrain.batch_size = 8\n");
    let a = sdfield(&["fit", p(&cfg_path)]);
    assert!(a.status.success(), "{}", stderr(&a));
    let log_a = std::fs::read(dir.path().join("loss.log")).unwrap();
    let b = sdfield(&["fit", p(&cfg_path)]);
    assert_eq!(stdout(&a), stdout(&b));
    assert_eq!(log_a, std::fs::read(dir.path().join("loss.log")).unwrap());
    assert_eq!(String::from_utf8(log_a).unwrap().lines().count(), 3);
}

#[test]
fn fit_config_errors() {
    let dir = TempDir::new().unwrap();
    let dangling = dir.path().join("dangling.cfg");
    std::fs::write(&dangling, "mesh = does/not/exist.obj\n").unwrap();
    assert_eq!(sdfield(&["fit", p(&dangling)]).status.code(), Some(3));

    let unknown = dir.path().join("unknown.cfg");
    std::fs::write(&unknown, "shape = sphere\ntrain.speed = 3\n").unwrap();
    assert_eq!(sdfield(&["fit", p(&unknown)]).status.code(), Some(3));

    let malformed = dir.path().join("malformed.cfg");
    std::fs::write(&malformed, "shape = sphere\nthis line has no separator\n").unwrap();
    let o = sdfield(&["fit", p(&malformed)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains('2'));

    assert_eq!(sdfield(&["fit", p(&dir.path().join("missing.cfg"))]).status.code(), Some(2));
}

fn zero_model_inputs(dir: &TempDir) -> (std::path::PathBuf, std::path::PathBuf) {
    let mut cfg = ModelConfig::default();
    cfg.encoder.input_width = 16;
    cfg.encoder.input_height = 16;
    let model = dir.path().join("zero.model");
    save_model(&model, &SdfModel::zeros(&cfg)).unwrap();
    let image = dir.path().join("blank.pgm");
    Image::filled(16, 16, 1, 0.5).quantized_u16().save_pgm(&image).unwrap();
    (model, image)
}

#[test]
fn reconstruct_zero_model_gives_empty_mesh() {
    let dir = TempDir::new().unwrap();
    let (model, image) = zero_model_inputs(&dir);
    let pose = dir.path().join("pose.txt");
    save_pose(&pose, &CameraPose::look_at(Vec3::new(0.5, -0.6, 1.3), Vec3::zeros(), Vec3::y()).unwrap()).unwrap();
    let obj = dir.path().join("out.obj");
    let o = sdfield(&[
        "reconstruct",
        "--model",
        p(&model),
        "--image",
        p(&image),
        "--pose",
        p(&pose),
        "--resolution",
        "8",
        "--width",
        "16",
        "--height",
        "16",
        "-o",
        p(&obj),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("warning"));
    let text = std::fs::read_to_string(&obj).unwrap();
    assert!(!text.lines().any(|l| l.starts_with("v ")));
}

#[test]
fn reconstruct_fit_pose_needs_correspondences() {
    let dir = TempDir::new().unwrap();
    let (model, image) = zero_model_inputs(&dir);
    let obj = dir.path().join("out.obj");
    let o = sdfield(&["reconstruct", "--model", p(&model), "--image", p(&image), "--fit-pose", "-o", p(&obj)]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn eval_same_and_disjoint_meshes() {
    let dir = TempDir::new().unwrap();
    let a = write_cube(&dir, "a.obj", 0.0);
    let same = stdout(&sdfield(&["eval", p(&a), p(&a), "--points", "256"]));
    assert_eq!(value(&same, "cd"), 0.0);
    assert_eq!(value(&same, "emd"), 0.0);
    assert_eq!(value(&same, "iou"), 1.0);

    let far = write_cube(&dir, "far.obj", 2.0);
    let disjoint = stdout(&sdfield(&["eval", p(&a), p(&far), "--points", "256"]));
    assert_eq!(value(&disjoint, "iou"), 0.0);

    let capped = sdfield(&["eval", p(&a), p(&a)]);
    assert!(capped.status.success());
    let out = stdout(&capped);
    assert!(value(&out, "emd").is_nan());
    assert_eq!(value(&out, "cd"), 0.0);
    assert_eq!(value(&out, "iou"), 1.0);

    let table = stdout(&sdfield(&["eval", p(&a), p(&far), "--points", "64", "--table"]));
    assert!(table.contains("IoU(%)"));
}

#[test]
fn pose_fit_recovers_pose() {
    let dir = TempDir::new().unwrap();
    let gt = CameraPose::look_at(Vec3::new(0.4, 0.3, 2.0), Vec3::zeros(), Vec3::y()).unwrap();
    let world: Vec<Vec3> = (0..64)
        .map(|i| {
            let t = i as f64;
            Vec3::new((t * 0.37).sin() * 0.4, (t * 0.91).cos() * 0.4, (t * 0.13).sin() * 0.4)
        })
        .collect();
    let cam: Vec<Vec3> = world.iter().map(|q| gt.transform(q)).collect();
    let corr = dir.path().join("corr.txt");
    std::fs::write(&corr, format_correspondences(&world, &cam)).unwrap();
    let gt_path = dir.path().join("gt.txt");
    save_pose(&gt_path, &gt).unwrap();
    let out_pose = dir.path().join("pose.txt");
    let o = sdfield(&["pose-fit", p(&corr), "--gt-pose", p(&gt_path), "-o", p(&out_pose)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(value(&out, "d3d") < 1e-3, "{out}");
    assert!(value(&out, "d2d") < 0.5, "{out}");
}

#[test]
fn render_depth_writes_image_and_pose() {
    let dir = TempDir::new().unwrap();
    let img = dir.path().join("d.pgm");
    let pose = dir.path().join("pose.txt");
    let o = sdfield(&[
        "render-depth",
        "--shape",
        "torus",
        "--resolution",
        "24",
        "--width",
        "32",
        "--height",
        "32",
        "-o",
        p(&img),
        "--pose-out",
        p(&pose),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let image = Image::load_pgm(&img).unwrap();
    assert_eq!((image.width(), image.height()), (32, 32));
    assert!(image.pixels().iter().any(|&v| v > 0.0));
    assert!(pose.exists());

    let bad = sdfield(&["render-depth", "--shape", "teapot", "-o", p(&img)]);
    assert_eq!(bad.status.code(), Some(3));
}
