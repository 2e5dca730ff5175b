use crate::{par, Error, Result, Vec3};

use super::kdtree::KdTree;

/// Mean over `from` of the squared distance to the nearest point of `to`.
pub fn directional_mean_sq(from: &[Vec3], to: &[Vec3], parallel: bool) -> f64 {
    let tree = KdTree::new(to);
    let d = par::map_slice(from, parallel, |p| tree.nearest_sq(p));
    d.iter().sum::<f64>() / from.len() as f64
}

/// Chamfer distance: the sum of both directional means of squared
/// nearest-neighbour distances.
pub fn chamfer(a: &[Vec3], b: &[Vec3]) -> Result<f64> {
    chamfer_with(a, b, par::parallel_available())
}

pub fn chamfer_with(a: &[Vec3], b: &[Vec3], parallel: bool) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyCloud);
    }
    Ok(directional_mean_sq(a, b, parallel) + directional_mean_sq(b, a, parallel))
}
