use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use crate::{Error, Result, Vec3};

use super::{Aabb, SdfGrid};

/// A query point with its ground-truth signed distance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointSample {
    pub p: Vec3,
    pub s: f64,
}

/// Draws `n` distinct lattice points, each selected with probability
/// proportional to `exp(-s^2 / (2 sigma^2))` of its stored value, without
/// replacement.
///
/// Uses exponential clocks: every point gets the key `ln(E) + s^2/(2 sigma^2)`
/// with `E ~ Exp(1)`, and the `n` smallest keys win. This is the log form of
/// weighted reservoir sampling, so weights that underflow in linear space
/// still compare correctly. Samples come out in selection order.
pub fn sample_training_points(grid: &SdfGrid, n: usize, sigma: f64, seed: u64) -> Result<Vec<PointSample>> {
    if n == 0 || n > grid.len() {
        return Err(Error::InvalidCount(format!("requested {n} samples from {} lattice points", grid.len())));
    }
    if sigma.is_nan() || sigma <= 0.0 {
        return Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inv = 1.0 / (2.0 * sigma * sigma);
    let mut keyed: Vec<(f64, usize)> = grid
        .values()
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let e: f64 = Exp1.sample(&mut rng);
            let s = s as f64;
            (e.ln() + s * s * inv, i)
        })
        .collect();
    if n < keyed.len() {
        keyed.select_nth_unstable_by(n - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        keyed.truncate(n);
    }
    keyed.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    Ok(keyed.into_iter().map(|(_, i)| PointSample { p: grid.position_of(i), s: grid.values()[i] as f64 }).collect())
}

/// Off-lattice samples with the same value-space Gaussian weighting: uniform
/// proposals in `bbox`, accepted with probability `exp(-s^2 / (2 sigma^2))`.
/// Used for held-out evaluation against a closed-form field.
pub fn sample_near_surface<F>(field: F, bbox: &Aabb, n: usize, sigma: f64, seed: u64) -> Vec<PointSample>
where
    F: Fn(&Vec3) -> f64,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    let inv = 1.0 / (2.0 * sigma * sigma);
    while out.len() < n {
        let p = Vec3::from_fn(|i, _| rng.random_range(bbox.min[i]..bbox.max[i]));
        let s = field(&p);
        if rng.random::<f64>() < (-s * s * inv).exp() {
            out.push(PointSample { p, s });
        }
    }
    out
}
