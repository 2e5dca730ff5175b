use crate::{Error, Result};

/// Weights of the one-sided weighted L1 loss.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossParams {
    /// Weight for points whose ground truth is below `delta` (near or inside).
    pub m1: f64,
    /// Weight for all other points.
    pub m2: f64,
    pub delta: f64,
}

impl Default for LossParams {
    fn default() -> Self {
        Self { m1: 4.0, m2: 1.0, delta: 0.01 }
    }
}

impl LossParams {
    pub fn new(m1: f64, m2: f64, delta: f64) -> Result<Self> {
        if !(m1 > 0.0 && m2 > 0.0) || !delta.is_finite() {
            return Err(Error::InvalidParameter(format!("invalid loss weights m1={m1} m2={m2} delta={delta}")));
        }
        Ok(Self { m1, m2, delta })
    }

    pub fn weight(&self, gt: f64) -> f64 {
        if gt < self.delta {
            self.m1
        } else {
            self.m2
        }
    }
}

/// `m * |pred - gt|` with `m = m1` when `gt < delta`, else `m2`.
pub fn sdf_loss(pred: f64, gt: f64, lp: &LossParams) -> f64 {
    lp.weight(gt) * (pred - gt).abs()
}

/// Derivative of [`sdf_loss`] with respect to `pred`; the subgradient at a
/// zero residual is 0.
pub fn sdf_loss_grad(pred: f64, gt: f64, lp: &LossParams) -> f64 {
    let r = pred - gt;
    if r > 0.0 {
        lp.weight(gt)
    } else if r < 0.0 {
        -lp.weight(gt)
    } else {
        0.0
    }
}

/// Cross entropy of an inside probability against the label `gt < 0`.
pub fn binary_loss(prob: f64, gt: f64) -> f64 {
    if gt < 0.0 {
        -prob.ln()
    } else {
        -(1.0 - prob).ln()
    }
}

/// [`binary_loss`] evaluated from the pre-sigmoid logit, stable for large
/// magnitudes.
pub fn binary_loss_from_logit(logit: f64, gt: f64) -> f64 {
    let y = if gt < 0.0 { 1.0 } else { 0.0 };
    // softplus(z) - y z
    let softplus = if logit > 0.0 { logit + (-logit).exp().ln_1p() } else { logit.exp().ln_1p() };
    softplus - y * logit
}

/// Derivative of [`binary_loss_from_logit`] with respect to the logit.
pub fn binary_loss_grad_logit(logit: f64, gt: f64) -> f64 {
    let y = if gt < 0.0 { 1.0 } else { 0.0 };
    super::mlp::sigmoid(logit) - y
}
