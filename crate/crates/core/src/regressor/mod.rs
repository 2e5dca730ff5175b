//! Implicit surface regressor: point lifting, global and local decoder
//! streams, losses, reverse-mode gradients and training.

pub mod io;
mod loss;
mod mlp;
mod model;
mod train;

pub use loss::{binary_loss, binary_loss_from_logit, binary_loss_grad_logit, sdf_loss, sdf_loss_grad, LossParams};
pub use mlp::{sigmoid, Activation, Dense, Mlp, MlpTrace};
pub use model::{
    backward, batch_loss, predict_field, predict_inside_prob, predict_sdf, predict_sdf_one_stream, project_or_center,
    ModelConfig, ModelGrads, ModelVariant, Objective, SdfModel, ViewBatch,
};
pub use train::{train, TrainConfig, TrainExample};

/// Lifts a point into the feature space of `lift`.
pub fn lift_point(p: &crate::Vec3, lift: &Mlp) -> crate::Result<Vec<f64>> {
    lift.forward_one(p.as_slice())
}
