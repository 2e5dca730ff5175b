use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::camera::{CameraPose, Intrinsics};
use crate::encoder::Image;
use crate::geometry::PointSample;
use crate::optim::{Adam, AdamConfig};
use crate::{Error, Result};

use super::loss::LossParams;
use super::model::{backward, Objective, SdfModel, ViewBatch};

/// One training view: depth image, the camera used to project points into
/// it, and supervised points with ground-truth signed distances.
#[derive(Clone, Debug)]
pub struct TrainExample {
    pub image: Image,
    pub pose: CameraPose,
    pub intrinsics: Intrinsics,
    pub samples: Vec<PointSample>,
}

impl TrainExample {
    pub fn view(&self) -> ViewBatch<'_> {
        ViewBatch { image: &self.image, pose: &self.pose, intrinsics: &self.intrinsics, samples: &self.samples }
    }
}

/// Optimizer settings.
///
/// `batch_size` counts supervised points per step. The step size is `lr`
/// for the first half of the run and then decays geometrically to
/// `lr_final` (equal values give a constant rate).
#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub lr: f64,
    pub lr_final: f64,
    pub batch_size: usize,
    pub iterations: usize,
    pub seed: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub loss: LossParams,
    /// Train with the local decoder held at zero.
    pub global_only: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        let adam = AdamConfig::default();
        Self {
            lr: 1e-4,
            lr_final: 1e-4,
            batch_size: 64,
            iterations: 5000,
            seed: 0,
            beta1: adam.beta1,
            beta2: adam.beta2,
            eps: adam.eps,
            loss: LossParams::default(),
            global_only: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [("lr", self.lr), ("lr_final", self.lr_final), ("eps", self.eps)];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidParameter(format!("{name} must lie in (0, 1), got {v}")));
            }
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidParameter("batch size must be at least 1".into()));
        }
        Ok(())
    }

    /// Step size at iteration `it`.
    pub fn lr_at(&self, it: usize) -> f64 {
        let half = self.iterations / 2;
        if it < half || self.iterations <= 1 {
            return self.lr;
        }
        let span = (self.iterations - 1 - half).max(1) as f64;
        let frac = (it - half) as f64 / span;
        self.lr * (self.lr_final / self.lr).powf(frac)
    }
}

/// Trains `model` with Adam. Iteration `i` uses example `i mod len` and a
/// seeded random subset of its points; the log holds each step's summed
/// batch loss. Parameters stay representable in `f32` after every step so
/// that a saved model reloads exactly.
pub fn train(model: &SdfModel, dataset: &[TrainExample], cfg: &TrainConfig) -> Result<(SdfModel, Vec<f64>)> {
    if dataset.is_empty() || dataset.iter().all(|e| e.samples.is_empty()) {
        return Err(Error::EmptyDataset);
    }
    cfg.validate()?;
    model.validate()?;
    let objective = Objective::for_variant(model.variant, cfg.loss);
    let mut model = model.clone();
    model.quantize_f32();
    let frozen_from = if cfg.global_only {
        model.restrict_to_global();
        let c = model.group_slice_counts();
        c[0] + c[1] + c[2]
    } else {
        usize::MAX
    };

    let adam_cfg = AdamConfig { lr: cfg.lr, beta1: cfg.beta1, beta2: cfg.beta2, eps: cfg.eps };
    let mut adam = Adam::new(adam_cfg, model.param_count());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut log = Vec::with_capacity(cfg.iterations);
    let usable: Vec<&TrainExample> = dataset.iter().filter(|e| !e.samples.is_empty()).collect();

    for it in 0..cfg.iterations {
        let ex = usable[it % usable.len()];
        let n = ex.samples.len();
        let mut picked: Vec<usize> = index::sample(&mut rng, n, cfg.batch_size.min(n)).into_vec();
        picked.sort_unstable();
        let batch: Vec<PointSample> = picked.iter().map(|&i| ex.samples[i]).collect();
        let view = ViewBatch { samples: &batch, ..ex.view() };
        let (loss, grads) = backward(&model, &[view], &objective)?;
        if !loss.is_finite() {
            return Err(Error::Numeric(format!("training loss became non-finite at iteration {it}")));
        }
        log.push(loss);

        let lr = cfg.lr_at(it);
        adam.begin_step();
        let mut offset = 0;
        for (k, (p, g)) in model.param_slices_mut().into_iter().zip(grads.param_slices()).enumerate() {
            if k < frozen_from {
                adam.update(offset, p, g, lr);
                p.iter_mut().for_each(|v| *v = *v as f32 as f64);
            }
            offset += p.len();
        }
    }
    Ok((model, log))
}
