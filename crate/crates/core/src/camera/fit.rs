use nalgebra::SymmetricEigen;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::optim::{Adam, AdamConfig};
use crate::{par, Error, Mat3, Result, Vec3};

use super::{camera_loss_and_grad, CameraPose, Rotation6D};

/// Settings for direct pose fitting.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitOptions {
    pub restarts: usize,
    pub max_steps: usize,
    pub lr: f64,
    /// Learning rate reached at the last step; the rate stays at `lr` for
    /// the first half and decays geometrically afterwards.
    pub lr_final: f64,
    /// A restart stops once its loss drops below this value.
    pub tolerance: f64,
    pub parallel: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { restarts: 20, max_steps: 2000, lr: 1e-2, lr_final: 1e-5, tolerance: 1e-16, parallel: true }
    }
}

impl FitOptions {
    fn lr_at(&self, step: usize) -> f64 {
        let half = self.max_steps / 2;
        if step < half {
            return self.lr;
        }
        let frac = (step - half) as f64 / (self.max_steps - half).max(1) as f64;
        self.lr * (self.lr_final / self.lr).powf(frac)
    }
}

/// Result of [`fit_pose`].
#[derive(Clone, Debug)]
pub struct PoseFit {
    pub pose: CameraPose,
    pub rotation_6d: Rotation6D,
    pub loss: f64,
    /// Index of the winning restart.
    pub restart: usize,
    /// Best-so-far loss of the winning restart, one entry per step.
    pub history: Vec<f64>,
}

fn check_cloud(pc: &[Vec3]) -> Result<()> {
    if pc.len() < 3 {
        return Err(Error::DegenerateCloud(format!("{} points; at least 3 non-collinear points required", pc.len())));
    }
    let centroid = pc.iter().sum::<Vec3>() / pc.len() as f64;
    let cov = pc.iter().fold(Mat3::zeros(), |acc, p| {
        let d = p - centroid;
        acc + d * d.transpose()
    });
    let mut eig = SymmetricEigen::new(cov).eigenvalues.as_slice().to_vec();
    eig.sort_by(|a, b| b.total_cmp(a));
    if eig[0] <= 0.0 || eig[1] <= 1e-12 * eig[0] {
        return Err(Error::DegenerateCloud("points are collinear".into()));
    }
    Ok(())
}

/// Final frame, translation, loss and best-so-far loss history of one restart.
type RestartResult = (Rotation6D, Vec3, f64, Vec<f64>);

fn run_restart(pc_w: &[Vec3], pc_g: &[Vec3], seed: u64, restart: usize, opts: &FitOptions) -> Result<RestartResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    let mut params = [0.0f64; 9];
    loop {
        for p in params.iter_mut() {
            *p = StandardNormal.sample(&mut rng);
        }
        if !Rotation6D::from_slice(&params).is_degenerate() {
            break;
        }
    }
    let mut adam = Adam::new(AdamConfig::with_lr(opts.lr), 9);
    let mut best = (params, f64::INFINITY);
    let mut history = Vec::with_capacity(opts.max_steps);
    for step in 0..opts.max_steps {
        let b = Rotation6D::from_slice(&params);
        let t = Vec3::new(params[6], params[7], params[8]);
        let lg = camera_loss_and_grad(&b, &t, pc_w, pc_g)?;
        if lg.loss < best.1 {
            best = (params, lg.loss);
        }
        history.push(best.1);
        if lg.loss < opts.tolerance {
            break;
        }
        adam.begin_step();
        adam.update(0, &mut params, &lg.to_array(), opts.lr_at(step));
    }
    let (p, loss) = best;
    Ok((Rotation6D::from_slice(&p), Vec3::new(p[6], p[7], p[8]), loss, history))
}

/// Minimizes the camera-space alignment loss over `(bx, by, t)` from seeded
/// random starts and keeps the best restart (lowest loss, ties to the lower
/// index). Restarts run concurrently when `opts.parallel` is set.
pub fn fit_pose(pc_w: &[Vec3], pc_g: &[Vec3], seed: u64, opts: &FitOptions) -> Result<PoseFit> {
    if pc_w.len() != pc_g.len() {
        return Err(Error::CorrespondenceMismatch(pc_w.len(), pc_g.len()));
    }
    check_cloud(pc_w)?;
    if opts.restarts == 0 || opts.max_steps == 0 {
        return Err(Error::InvalidParameter("pose fitting needs at least one restart and one step".into()));
    }
    let runs = par::map_range(opts.restarts, opts.parallel, |r| run_restart(pc_w, pc_g, seed, r, opts));
    let mut winner: Option<(usize, RestartResult)> = None;
    for (r, run) in runs.into_iter().enumerate() {
        let run = run?;
        if winner.as_ref().is_none_or(|(_, w)| run.2 < w.2) {
            winner = Some((r, run));
        }
    }
    let (restart, (b, t, loss, history)) = winner.expect("at least one restart");
    Ok(PoseFit { pose: CameraPose::from_6d(&b, t)?, rotation_6d: b, loss, restart, history })
}
