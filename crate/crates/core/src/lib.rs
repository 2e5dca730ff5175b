//! Single-view implicit surface reconstruction at desk scale.
//!
//! The crate is organised around the data flow of the method:
//!
//! - [`geometry`]: triangle meshes, exact signed distance queries, SDF grids,
//!   near-surface training samples and depth rendering by sphere tracing.
//! - [`camera`]: the continuous 6D rotation representation, pinhole
//!   projection, the camera-space alignment loss and direct pose fitting.
//! - [`encoder`]: a small convolutional image encoder, bilinear local feature
//!   sampling, multi-view pooling and feature interpolation.
//! - [`regressor`]: the point-lifting MLP, the two-stream / one-stream /
//!   binary decoders, the weighted L1 loss, reverse-mode gradients and the
//!   training loop.
//! - [`extraction`]: dense field evaluation and marching cubes.
//! - [`metrics`]: Chamfer distance, Earth Mover's distance and voxel IoU.
//! - [`pipeline`] and [`config`]: experiment recipes shared by the CLI and
//!   the acceptance tests.
//!
//! Data-parallel loops (grid builds, field evaluation, nearest-neighbour
//! passes, pose restarts) run on rayon when the `parallel` feature is on and
//! fall back to plain iterators otherwise. Results never depend on the
//! number of workers.

pub mod camera;
pub mod config;
pub mod encoder;
mod error;
pub mod extraction;
pub mod geometry;
pub mod metrics;
pub mod optim;
pub mod par;
pub mod pipeline;
pub mod regressor;

pub use error::{Error, Result};

/// 3D vector type used throughout the crate.
pub type Vec3 = nalgebra::Vector3<f64>;
/// 2D vector type for pixel positions.
pub type Vec2 = nalgebra::Vector2<f64>;
/// 3x3 matrix type.
pub type Mat3 = nalgebra::Matrix3<f64>;
