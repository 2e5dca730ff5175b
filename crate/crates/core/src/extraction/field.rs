use crate::camera::{CameraPose, Intrinsics};
use crate::encoder::{encode_image, FeatureMapStack, Image};
use crate::geometry::{Aabb, SdfGrid, TriangleMesh};
use crate::regressor::{predict_field, SdfModel};
use crate::{par, Error, Result, Vec3};

use super::marching_cubes::marching_cubes_with;

/// Lattice points evaluated per batched forward pass.
const EVAL_CHUNK: usize = 2048;

/// Where and at which level to extract a surface.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IsoSurfaceConfig {
    pub resolution: usize,
    pub iso_value: f64,
    pub bbox: Aabb,
}

impl Default for IsoSurfaceConfig {
    fn default() -> Self {
        Self { resolution: 64, iso_value: 0.0, bbox: Aabb::cube(0.5) }
    }
}

impl IsoSurfaceConfig {
    pub fn validate(&self) -> Result<()> {
        if self.resolution < 2 {
            return Err(Error::InvalidResolution(self.resolution));
        }
        if !self.bbox.is_valid() {
            return Err(Error::InvalidParameter("degenerate extraction bounding box".into()));
        }
        if !self.iso_value.is_finite() {
            return Err(Error::InvalidParameter("iso value must be finite".into()));
        }
        Ok(())
    }
}

/// A model evaluated on a lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldEvaluation {
    pub grid: SdfGrid,
    /// Lattice points whose projection fell back to the principal point.
    pub projection_failures: usize,
}

/// Evaluates the model's scalar field at every lattice point of
/// `cfg.bbox`, using `stack` as the encoded input view.
pub fn evaluate_field(
    model: &SdfModel,
    stack: &FeatureMapStack,
    pose: &CameraPose,
    intr: &Intrinsics,
    cfg: &IsoSurfaceConfig,
    parallel: bool,
) -> Result<FieldEvaluation> {
    cfg.validate()?;
    let shell = SdfGrid::new([cfg.resolution; 3], cfg.bbox, vec![0.0; cfg.resolution.pow(3)])?;
    let chunks = par::map_chunks(shell.len(), EVAL_CHUNK, parallel, |range| {
        let pts: Vec<Vec3> = range.map(|i| shell.position_of(i)).collect();
        predict_field(model, stack, pose, intr, &pts)
    });
    let mut values = Vec::with_capacity(shell.len());
    let mut projection_failures = 0;
    for c in chunks {
        let (v, failed) = c?;
        values.extend(v.into_iter().map(|x| x as f32));
        projection_failures += failed;
    }
    Ok(FieldEvaluation { grid: SdfGrid::new(shell.resolution(), shell.bbox(), values)?, projection_failures })
}

/// Encodes `image`, evaluates the field and extracts the iso-surface.
pub fn reconstruct(
    model: &SdfModel,
    image: &Image,
    pose: &CameraPose,
    intr: &Intrinsics,
    cfg: &IsoSurfaceConfig,
    parallel: bool,
) -> Result<TriangleMesh> {
    let stack = encode_image(image, &model.encoder)?;
    let field = evaluate_field(model, &stack, pose, intr, cfg, parallel)?;
    Ok(marching_cubes_with(&field.grid, cfg.iso_value, parallel))
}
