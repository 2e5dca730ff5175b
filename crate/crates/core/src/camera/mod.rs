//! Camera extrinsics in the continuous 6D rotation representation, pinhole
//! projection, the camera-space alignment loss and direct pose fitting.
//!
//! Rotation matrices have rows `(Rx, Ry, Rz)` and act on column vectors, so a
//! world point maps to camera space as `R * p + t`. The camera looks down
//! `+z`; pixel rows grow along `+y`.

mod fit;
pub mod io;
mod pose;
mod rotation;

pub use fit::{fit_pose, FitOptions, PoseFit};
pub use pose::{
    camera_loss, camera_loss_and_grad, pose_metrics, project_point, CameraPose, Intrinsics, LossGrad, PointCloud,
    PoseMetrics,
};
pub use rotation::{rotation_from_6d, rotation_from_6d_backward, six_d_from_rotation, Rotation6D};
