use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::camera::PointCloud;
use crate::geometry::TriangleMesh;
use crate::{Error, Result};

/// Draws `n` points uniformly by area from the mesh surface.
pub fn sample_surface_points(mesh: &TriangleMesh, n: usize, seed: u64) -> Result<PointCloud> {
    if n == 0 {
        return Err(Error::InvalidCount("surface sample count must be at least 1".into()));
    }
    let areas: Vec<f64> = mesh.triangles().map(|[a, b, c]| 0.5 * (b - a).cross(&(c - a)).norm()).collect();
    let total: f64 = areas.iter().sum();
    if mesh.is_empty() || total.is_nan() || total <= 0.0 {
        return Err(Error::DegenerateMesh("mesh has no surface area to sample".into()));
    }
    let pick = WeightedIndex::new(&areas).map_err(|e| Error::DegenerateMesh(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n)
        .map(|_| {
            let [a, b, c] = mesh.triangle(pick.sample(&mut rng));
            let s = rng.random::<f64>().sqrt();
            let r = rng.random::<f64>();
            a * (1.0 - s) + b * (s * (1.0 - r)) + c * (s * r)
        })
        .collect())
}
