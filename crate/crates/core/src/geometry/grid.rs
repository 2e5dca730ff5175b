use crate::{par, Error, Result, Vec3};

use super::{signed_distance, Aabb, TriangleMesh};

/// Regular lattice of signed distance samples.
///
/// Lattice point `(i, j, k)` sits at `bbox.min + (i, j, k) * extent / (res - 1)`,
/// so both box faces carry samples. Values are stored x-fastest. Storage is
/// single precision (values and box corners), matching the on-disk format so
/// that a save/load round trip is exact.
#[derive(Clone, Debug, PartialEq)]
pub struct SdfGrid {
    res: [usize; 3],
    bbox: Aabb,
    values: Vec<f32>,
}

fn quantize(v: Vec3) -> Vec3 {
    v.map(|c| c as f32 as f64)
}

impl SdfGrid {
    pub fn new(res: [usize; 3], bbox: Aabb, values: Vec<f32>) -> Result<Self> {
        if let Some(&r) = res.iter().find(|&&r| r < 2) {
            return Err(Error::InvalidResolution(r));
        }
        let bbox = Aabb::new(quantize(bbox.min), quantize(bbox.max));
        if !bbox.is_valid() {
            return Err(Error::InvalidParameter("degenerate grid bounding box".into()));
        }
        let n = res[0] * res[1] * res[2];
        if values.len() != n {
            return Err(Error::shape(format!("grid expects {n} values, got {}", values.len())));
        }
        Ok(Self { res, bbox, values })
    }

    /// Samples `f` at every lattice point.
    pub fn from_fn<F>(res: [usize; 3], bbox: Aabb, parallel: bool, f: F) -> Result<Self>
    where
        F: Fn(&Vec3) -> f64 + Sync + Send,
    {
        let shell = Self::new(res, bbox, vec![0.0; res.iter().product()])?;
        let values = par::map_range(shell.len(), parallel, |i| f(&shell.position_of(i)) as f32);
        Ok(Self { values, ..shell })
    }

    pub fn resolution(&self) -> [usize; 3] {
        self.res
    }

    pub fn bbox(&self) -> Aabb {
        self.bbox
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f32] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.res[0] * (j + self.res[1] * k)
    }

    pub fn coords_of(&self, idx: usize) -> [usize; 3] {
        let i = idx % self.res[0];
        let j = (idx / self.res[0]) % self.res[1];
        let k = idx / (self.res[0] * self.res[1]);
        [i, j, k]
    }

    pub fn value(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[self.index(i, j, k)] as f64
    }

    /// Lattice spacing per axis.
    pub fn spacing(&self) -> Vec3 {
        let e = self.bbox.extent();
        Vec3::new(e.x / (self.res[0] - 1) as f64, e.y / (self.res[1] - 1) as f64, e.z / (self.res[2] - 1) as f64)
    }

    /// Length of one cell diagonal.
    pub fn cell_diagonal(&self) -> f64 {
        self.spacing().norm()
    }

    /// Largest single-axis spacing.
    pub fn cell_size(&self) -> f64 {
        self.spacing().max()
    }

    pub fn position(&self, i: usize, j: usize, k: usize) -> Vec3 {
        let s = self.spacing();
        self.bbox.min + Vec3::new(i as f64 * s.x, j as f64 * s.y, k as f64 * s.z)
    }

    pub fn position_of(&self, idx: usize) -> Vec3 {
        let [i, j, k] = self.coords_of(idx);
        self.position(i, j, k)
    }

    /// Trilinear interpolation; points outside the box are clamped to it.
    pub fn sample(&self, p: &Vec3) -> f64 {
        let s = self.spacing();
        let mut base = [0usize; 3];
        let mut frac = [0.0f64; 3];
        for a in 0..3 {
            let g = ((p[a] - self.bbox.min[a]) / s[a]).clamp(0.0, (self.res[a] - 1) as f64);
            let b = (g.floor() as usize).min(self.res[a] - 2);
            base[a] = b;
            frac[a] = g - b as f64;
        }
        let mut acc = 0.0;
        for corner in 0..8 {
            let o = [corner & 1, (corner >> 1) & 1, (corner >> 2) & 1];
            let w: f64 = (0..3).map(|a| if o[a] == 1 { frac[a] } else { 1.0 - frac[a] }).product();
            if w != 0.0 {
                acc += w * self.value(base[0] + o[0], base[1] + o[1], base[2] + o[2]);
            }
        }
        acc
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f32::INFINITY, f32::min) as f64
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f32::NEG_INFINITY, f32::max) as f64
    }

    pub fn negative_fraction(&self) -> f64 {
        self.values.iter().filter(|&&v| v < 0.0).count() as f64 / self.len() as f64
    }
}

/// Exact mesh SDF sampled on a cubic lattice of `resolution^3` points over
/// `bbox`. The serial and parallel paths produce bit-identical values.
pub fn build_sdf_grid(mesh: &TriangleMesh, resolution: usize, bbox: Aabb, parallel: bool) -> Result<SdfGrid> {
    if resolution < 2 {
        return Err(Error::InvalidResolution(resolution));
    }
    if mesh.is_empty() {
        return Err(Error::InvalidMesh("mesh has no faces".into()));
    }
    SdfGrid::from_fn([resolution; 3], bbox, parallel, |p| signed_distance(mesh, p))
}
