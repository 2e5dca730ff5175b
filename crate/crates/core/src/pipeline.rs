//! End-to-end composition: shape to SDF grid, depth image and samples, then
//! training, held-out evaluation and reconstruction.

use crate::camera::{fit_pose, CameraPose, FitOptions, Intrinsics};
use crate::config::{PoseMode, RunConfig, ShapeSpec};
use crate::encoder::{encode_image, Image};
use crate::extraction::marching_cubes;
use crate::geometry::io::load_mesh;
use crate::geometry::shapes::{cube, icosphere, torus, AnalyticShape};
use crate::geometry::{
    build_sdf_grid, render_depth_image, sample_near_surface, sample_training_points, signed_distance, Aabb,
    PointSample, SdfGrid, TriangleMesh,
};
use crate::regressor::{predict_field, sdf_loss, train, LossParams, ModelConfig, ModelVariant, SdfModel, TrainExample};
use crate::{Error, Result, Vec3};

/// A closed-form field or a triangle mesh.
#[derive(Clone, Debug)]
pub enum ShapeSource {
    Analytic(AnalyticShape),
    Mesh(TriangleMesh),
}

impl ShapeSource {
    pub fn sdf(&self, p: &Vec3) -> f64 {
        match self {
            ShapeSource::Analytic(s) => s.sdf(p),
            ShapeSource::Mesh(m) => signed_distance(m, p),
        }
    }

    pub fn grid(&self, resolution: usize, bbox: Aabb, parallel: bool) -> Result<SdfGrid> {
        match self {
            ShapeSource::Analytic(s) => SdfGrid::from_fn([resolution; 3], bbox, parallel, |p| s.sdf(p)),
            ShapeSource::Mesh(m) => build_sdf_grid(m, resolution, bbox, parallel),
        }
    }

    /// A mesh of the surface for metric comparisons.
    pub fn reference_mesh(&self, bbox: Aabb) -> Result<TriangleMesh> {
        Ok(match self {
            ShapeSource::Mesh(m) => m.clone(),
            ShapeSource::Analytic(AnalyticShape::Sphere { center, radius }) => icosphere(*center, *radius, 5),
            ShapeSource::Analytic(AnalyticShape::Box { half }) => cube(-half, *half),
            ShapeSource::Analytic(AnalyticShape::Torus { major, minor }) => torus(*major, *minor, 128, 64),
            ShapeSource::Analytic(s @ AnalyticShape::TorusBump { .. }) => {
                let g = SdfGrid::from_fn([160; 3], bbox, true, |p| s.sdf(p))?;
                marching_cubes(&g, 0.0)
            }
        })
    }
}

/// A camera looking at the shape.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ViewSpec {
    pub eye: Vec3,
    pub target: Vec3,
    pub up: Vec3,
    pub intrinsics: Intrinsics,
}

impl ViewSpec {
    pub fn pose(&self) -> Result<CameraPose> {
        CameraPose::look_at(self.eye, self.target, self.up)
    }

    /// Depth range that brackets the whole box, used to normalize depth.
    pub fn depth_range(&self, bbox: &Aabb) -> (f64, f64) {
        let d = (bbox.center() - self.eye).norm();
        let r = 0.5 * bbox.diagonal();
        ((d - r).max(1e-3), d + r)
    }
}

/// Everything derived from a shape and a view before training.
#[derive(Clone, Debug)]
pub struct Scene {
    pub grid: SdfGrid,
    /// Network input: depth normalized to `[0, 1]` (near is bright,
    /// background 0) and quantized to 16 bits.
    pub image: Image,
    pub pose: CameraPose,
    pub intrinsics: Intrinsics,
}

pub fn build_scene(
    shape: &ShapeSource,
    bbox: Aabb,
    resolution: usize,
    view: &ViewSpec,
    parallel: bool,
) -> Result<Scene> {
    let grid = shape.grid(resolution, bbox, parallel)?;
    let pose = view.pose()?;
    let intr = view.intrinsics;
    let depth = render_depth_image(&grid, &pose, &intr, intr.width, intr.height)?;
    let (near, far) = view.depth_range(&bbox);
    let image = depth.normalized_depth(near, far).quantized_u16();
    Ok(Scene { grid, image, pose, intrinsics: intr })
}

/// Gaussian-weighted lattice samples. For closed-form shapes the stored grid
/// value is replaced by the exact field value.
pub fn training_samples(
    scene: &Scene,
    shape: &ShapeSource,
    n: usize,
    sigma: f64,
    seed: u64,
) -> Result<Vec<PointSample>> {
    let mut samples = sample_training_points(&scene.grid, n, sigma, seed)?;
    if let ShapeSource::Analytic(s) = shape {
        samples.iter_mut().for_each(|x| x.s = s.sdf(&x.p));
    }
    Ok(samples)
}

pub fn training_example(scene: &Scene, samples: Vec<PointSample>) -> TrainExample {
    TrainExample { image: scene.image.clone(), pose: scene.pose, intrinsics: scene.intrinsics, samples }
}

/// Off-lattice near-surface samples with exact ground truth.
pub fn held_out_samples(shape: &ShapeSource, bbox: &Aabb, n: usize, sigma: f64, seed: u64) -> Vec<PointSample> {
    sample_near_surface(|p| shape.sdf(p), bbox, n, sigma, seed)
}

/// Accuracy of a model on held-out points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HeldOutStats {
    pub n: usize,
    /// Mean `|prediction - truth|` (regression variants only; `NaN` for
    /// binary models).
    pub mean_abs_error: f64,
    /// Mean per-point training objective.
    pub mean_loss: f64,
    /// Fraction of points whose predicted side matches the truth.
    pub sign_accuracy: f64,
}

/// Predicted field values at the samples (the SDF, or `0.5 - P(inside)`
/// for binary models).
pub fn predict_samples(
    model: &SdfModel,
    image: &Image,
    pose: &CameraPose,
    intr: &Intrinsics,
    samples: &[PointSample],
) -> Result<Vec<f64>> {
    let stack = encode_image(image, &model.encoder)?;
    let pts: Vec<Vec3> = samples.iter().map(|s| s.p).collect();
    Ok(predict_field(model, &stack, pose, intr, &pts)?.0)
}

pub fn evaluate_held_out(
    model: &SdfModel,
    image: &Image,
    pose: &CameraPose,
    intr: &Intrinsics,
    samples: &[PointSample],
    lp: &LossParams,
) -> Result<HeldOutStats> {
    if samples.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let pred = predict_samples(model, image, pose, intr, samples)?;
    let n = samples.len() as f64;
    let inside = |v: f64| v < 0.0;
    let sign_accuracy = pred.iter().zip(samples).filter(|(&v, s)| inside(v) == inside(s.s)).count() as f64 / n;
    let (mean_abs_error, mean_loss) = match model.variant {
        ModelVariant::Binary => {
            let loss: f64 = pred
                .iter()
                .zip(samples)
                .map(|(&v, s)| {
                    let prob = (0.5 - v).clamp(1e-15, 1.0 - 1e-15);
                    crate::regressor::binary_loss(prob, s.s)
                })
                .sum();
            (f64::NAN, loss / n)
        }
        _ => {
            let err: f64 = pred.iter().zip(samples).map(|(&v, s)| (v - s.s).abs()).sum();
            let loss: f64 = pred.iter().zip(samples).map(|(&v, s)| sdf_loss(v, s.s, lp)).sum();
            (err / n, loss / n)
        }
    };
    Ok(HeldOutStats { n: samples.len(), mean_abs_error, mean_loss, sign_accuracy })
}

/// Fraction of samples with `|truth| > delta` on which a regression model's
/// sign and a binary model's thresholded probability agree.
pub fn sign_agreement(regression: &[f64], binary_field: &[f64], samples: &[PointSample], delta: f64) -> f64 {
    let mut total = 0usize;
    let mut agree = 0usize;
    for ((&r, &b), s) in regression.iter().zip(binary_field).zip(samples) {
        if s.s.abs() > delta {
            total += 1;
            agree += ((r < 0.0) == (b < 0.0)) as usize;
        }
    }
    if total == 0 {
        1.0
    } else {
        agree as f64 / total as f64
    }
}

/// Shape, scene and samples of a run config.
pub struct Prepared {
    pub shape: ShapeSource,
    pub scene: Scene,
    pub samples: Vec<PointSample>,
    pub held_out: Vec<PointSample>,
}

pub fn shape_from_config(cfg: &RunConfig) -> Result<ShapeSource> {
    Ok(match &cfg.shape {
        ShapeSpec::Analytic(name) => ShapeSource::Analytic(
            AnalyticShape::by_name(name).ok_or_else(|| Error::InvalidParameter(format!("unknown shape `{name}`")))?,
        ),
        ShapeSpec::Mesh(path) => ShapeSource::Mesh(load_mesh(path)?),
    })
}

pub fn view_from_config(cfg: &RunConfig) -> Result<ViewSpec> {
    let (w, h) = (cfg.image_width, cfg.image_height);
    let focal = cfg.focal.unwrap_or(w as f64);
    Ok(ViewSpec {
        eye: cfg.eye,
        target: cfg.target,
        up: cfg.up,
        intrinsics: Intrinsics::new(focal, w as f64 / 2.0, h as f64 / 2.0, w, h)?,
    })
}

pub fn prepare(cfg: &RunConfig, parallel: bool) -> Result<Prepared> {
    cfg.validate()?;
    let shape = shape_from_config(cfg)?;
    let view = view_from_config(cfg)?;
    let bbox = cfg.bbox();
    let mut scene = build_scene(&shape, bbox, cfg.grid_resolution, &view, parallel)?;
    if let Some(p) = &cfg.image {
        scene.image = Image::load_pgm(p)?;
    }
    let samples = training_samples(&scene, &shape, cfg.sample_count, cfg.sample_sigma, cfg.sample_seed)?;
    let held_out = held_out_samples(&shape, &bbox, cfg.held_out_count, cfg.sample_sigma, cfg.held_out_seed);
    Ok(Prepared { shape, scene, samples, held_out })
}

pub fn model_config(cfg: &RunConfig, image: &Image) -> ModelConfig {
    let mut m = ModelConfig::default().with_variant(cfg.variant);
    m.encoder.input_width = image.width();
    m.encoder.input_height = image.height();
    m.encoder.input_channels = image.channels();
    m
}

/// Result of [`run_fit`].
pub struct FitOutcome {
    pub initial: SdfModel,
    pub model: SdfModel,
    pub loss_log: Vec<f64>,
    pub held_out: HeldOutStats,
    /// Pose used for the held-out evaluation.
    pub eval_pose: CameraPose,
    pub prepared: Prepared,
}

/// Samples, trains with ground-truth poses, and evaluates on held-out points
/// with the configured pose mode.
pub fn run_fit(cfg: &RunConfig, parallel: bool) -> Result<FitOutcome> {
    let prepared = prepare(cfg, parallel)?;
    let scene = &prepared.scene;
    let mut initial = SdfModel::init(&model_config(cfg, &scene.image), cfg.model_seed);
    if cfg.train.global_only {
        initial.restrict_to_global();
    }
    let example = training_example(scene, prepared.samples.clone());
    let (model, loss_log) = train(&initial, std::slice::from_ref(&example), &cfg.train)?;
    let eval_pose = match cfg.pose_mode {
        PoseMode::GroundTruth => scene.pose,
        PoseMode::Estimated => {
            let path = cfg.correspondences.as_ref().expect("validated");
            let (world, cam) = crate::camera::io::load_correspondences(path)?;
            fit_pose(&world, &cam, cfg.train.seed, &FitOptions::default())?.pose
        }
    };
    let held_out =
        evaluate_held_out(&model, &scene.image, &eval_pose, &scene.intrinsics, &prepared.held_out, &cfg.train.loss)?;
    Ok(FitOutcome { initial, model, loss_log, held_out, eval_pose, prepared })
}
