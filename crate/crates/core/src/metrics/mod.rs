//! Evaluation metrics: surface sampling, chamfer distance, earth mover's
//! distance and voxel IoU.

mod chamfer;
mod emd;
mod iou;
mod kdtree;
mod report;
mod sampling;

pub use chamfer::{chamfer, chamfer_with, directional_mean_sq};
pub use emd::{emd, emd_with, hungarian, EmdOptions, EmdResult, DEFAULT_EMD_CAP};
pub use iou::{voxel_iou, voxel_iou_with, IouResult, UNRELIABLE_FRACTION};
pub use kdtree::KdTree;
pub use report::{evaluate_meshes, EvalOptions, MetricReport};
pub use sampling::sample_surface_points;
