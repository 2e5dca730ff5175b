//! Dense field evaluation and iso-surface extraction.

mod field;
mod marching_cubes;
mod tables;

pub use field::{evaluate_field, reconstruct, FieldEvaluation, IsoSurfaceConfig};
pub use marching_cubes::{marching_cubes, marching_cubes_with, WELD_EPS};
