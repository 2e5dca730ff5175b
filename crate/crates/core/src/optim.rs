//! First-order Adam updates over flat parameter slices.

/// Moment coefficients and step size.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamConfig {
    pub fn with_lr(lr: f64) -> Self {
        Self { lr, ..Self::default() }
    }
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { lr: 1e-3, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

/// Per-parameter first and second moment estimates.
#[derive(Clone, Debug)]
pub struct Adam {
    cfg: AdamConfig,
    m: Vec<f64>,
    v: Vec<f64>,
    step: i32,
}

impl Adam {
    pub fn new(cfg: AdamConfig, n_params: usize) -> Self {
        Self { cfg, m: vec![0.0; n_params], v: vec![0.0; n_params], step: 0 }
    }

    pub fn config(&self) -> &AdamConfig {
        &self.cfg
    }

    pub fn steps_taken(&self) -> i32 {
        self.step
    }

    /// Starts a new step; must be called once before the `update` calls of a
    /// step.
    pub fn begin_step(&mut self) {
        self.step += 1;
    }

    /// Updates `params[i]` for the slice that starts at `offset` in the flat
    /// parameter order, using learning rate `lr`.
    pub fn update(&mut self, offset: usize, params: &mut [f64], grads: &[f64], lr: f64) {
        let c = self.cfg;
        let bc1 = 1.0 - c.beta1.powi(self.step);
        let bc2 = 1.0 - c.beta2.powi(self.step);
        let m = &mut self.m[offset..offset + params.len()];
        let v = &mut self.v[offset..offset + params.len()];
        for i in 0..params.len() {
            let g = grads[i];
            m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g;
            v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g * g;
            let mhat = m[i] / bc1;
            let vhat = v[i] / bc2;
            params[i] -= lr * mhat / (vhat.sqrt() + c.eps);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_moves_by_lr() {
        let mut adam = Adam::new(AdamConfig::with_lr(0.1), 2);
        let mut p = [1.0, -1.0];
        adam.begin_step();
        adam.update(0, &mut p, &[3.0, -0.5], 0.1);
        assert!((p[0] - 0.9).abs() < 1e-6 && (p[1] + 0.9).abs() < 1e-6);
    }

    #[test]
    fn minimizes_quadratic() {
        let mut adam = Adam::new(AdamConfig::with_lr(0.05), 1);
        let mut x = [4.0];
        for _ in 0..2000 {
            adam.begin_step();
            let g = [2.0 * (x[0] - 1.5)];
            adam.update(0, &mut x, &g, 0.05);
        }
        assert!((x[0] - 1.5).abs() < 1e-3);
    }
}
