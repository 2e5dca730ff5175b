//! Meshes, exact signed distance queries, SDF grids, training-point sampling
//! and depth rendering.
//!
//! Sign convention everywhere: negative inside, positive outside, zero on the
//! surface.

mod distance;
mod grid;
pub mod io;
mod mesh;
mod render;
mod sampling;
pub mod shapes;
mod winding;

pub use distance::{closest_point_on_triangle, point_triangle_distance, unsigned_distance};
pub use grid::{build_sdf_grid, SdfGrid};
pub use mesh::{normalize_mesh, Aabb, NormalizationRecord, TriangleMesh};
pub use render::render_depth_image;
pub use sampling::{sample_near_surface, sample_training_points, PointSample};
pub(crate) use winding::inside_query;
pub use winding::{
    ray_parity_inside, signed_distance, signed_distance_query, winding_number, SignedDistance, UNCERTAIN_BAND,
};
