use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Activation {
    Linear,
    Relu,
    Sigmoid,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Linear => x,
            Activation::Relu => x.max(0.0),
            Activation::Sigmoid => sigmoid(x),
        }
    }

    /// Derivative expressed through the activation's output.
    fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Linear => 1.0,
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => y * (1.0 - y),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Linear => "linear",
            Activation::Relu => "relu",
            Activation::Sigmoid => "sigmoid",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "linear" => Some(Activation::Linear),
            "relu" => Some(Activation::Relu),
            "sigmoid" => Some(Activation::Sigmoid),
            _ => None,
        }
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Fully connected layer `y = act(x W + b)` with `W` stored `in x out`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dense {
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
    pub activation: Activation,
}

impl Dense {
    pub fn zeros(input: usize, output: usize, activation: Activation) -> Self {
        Self { weight: Array2::zeros((input, output)), bias: Array1::zeros(output), activation }
    }

    pub fn input_dim(&self) -> usize {
        self.weight.nrows()
    }

    pub fn output_dim(&self) -> usize {
        self.weight.ncols()
    }
}

/// Multi-layer perceptron.
#[derive(Clone, Debug, PartialEq)]
pub struct Mlp {
    pub layers: Vec<Dense>,
}

/// Activations recorded by [`Mlp::forward`]: `values[0]` is the input and
/// `values[i + 1]` the output of layer `i`.
#[derive(Clone, Debug)]
pub struct MlpTrace {
    pub values: Vec<Array2<f64>>,
}

impl MlpTrace {
    pub fn output(&self) -> &Array2<f64> {
        self.values.last().expect("trace holds the input")
    }
}

impl Mlp {
    /// Layers of widths `dims[0] -> dims[1] -> ...`; `hidden` on every layer
    /// except the last, which uses `output`.
    pub fn zeros(dims: &[usize], hidden: Activation, output: Activation) -> Self {
        let n = dims.len().saturating_sub(1);
        let layers =
            (0..n).map(|i| Dense::zeros(dims[i], dims[i + 1], if i + 1 == n { output } else { hidden })).collect();
        Self { layers }
    }

    /// Uniform `±sqrt(6 / (fan_in + fan_out))` weights, zero biases.
    pub fn init<R: Rng>(dims: &[usize], hidden: Activation, output: Activation, rng: &mut R) -> Self {
        let mut mlp = Self::zeros(dims, hidden, output);
        for l in &mut mlp.layers {
            let bound = (6.0 / (l.input_dim() + l.output_dim()) as f64).sqrt();
            l.weight.mapv_inplace(|_| rng.random_range(-bound..bound));
        }
        mlp
    }

    pub fn zeros_like(&self) -> Self {
        Self { layers: self.layers.iter().map(|l| Dense::zeros(l.input_dim(), l.output_dim(), l.activation)).collect() }
    }

    pub fn input_dim(&self) -> usize {
        self.layers.first().map_or(0, Dense::input_dim)
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, Dense::output_dim)
    }

    /// Widths from input to output.
    pub fn dims(&self) -> Vec<usize> {
        let mut d = vec![self.input_dim()];
        d.extend(self.layers.iter().map(Dense::output_dim));
        d
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.weight.len() + l.bias.len()).sum()
    }

    /// Checks that consecutive layer widths chain.
    pub fn validate(&self) -> Result<()> {
        for (i, w) in self.layers.windows(2).enumerate() {
            if w[0].output_dim() != w[1].input_dim() {
                return Err(Error::shape(format!(
                    "layer {i} outputs {} values but layer {} expects {}",
                    w[0].output_dim(),
                    i + 1,
                    w[1].input_dim()
                )));
            }
        }
        Ok(())
    }

    /// Parameter slices in declaration order (per layer: weight, then bias).
    pub fn param_slices(&self) -> Vec<&[f64]> {
        self.layers
            .iter()
            .flat_map(|l| [l.weight.as_slice().expect("standard layout"), l.bias.as_slice().expect("contiguous")])
            .collect()
    }

    pub fn param_slices_mut(&mut self) -> Vec<&mut [f64]> {
        self.layers
            .iter_mut()
            .flat_map(|l| {
                [l.weight.as_slice_mut().expect("standard layout"), l.bias.as_slice_mut().expect("contiguous")]
            })
            .collect()
    }

    /// Batched forward pass over the rows of `x`.
    pub fn forward(&self, x: Array2<f64>) -> Result<MlpTrace> {
        if x.ncols() != self.input_dim() {
            return Err(Error::shape(format!("MLP expects {} inputs, got {}", self.input_dim(), x.ncols())));
        }
        let mut values = Vec::with_capacity(self.layers.len() + 1);
        values.push(x);
        for l in &self.layers {
            let mut y = values.last().unwrap().dot(&l.weight);
            y += &l.bias;
            let act = l.activation;
            if act != Activation::Linear {
                y.mapv_inplace(|v| act.apply(v));
            }
            values.push(y);
        }
        Ok(MlpTrace { values })
    }

    /// Forward pass of a single input vector.
    pub fn forward_one(&self, x: &[f64]) -> Result<Vec<f64>> {
        let row = Array2::from_shape_vec((1, x.len()), x.to_vec()).expect("row shape");
        Ok(self.forward(row)?.output().row(0).to_vec())
    }

    /// Reverse pass. Accumulates parameter gradients into `grads` and
    /// returns the gradient with respect to the input rows.
    pub fn backward(&self, trace: &MlpTrace, grad_out: ArrayView2<f64>, grads: &mut Mlp) -> Array2<f64> {
        let mut g = grad_out.to_owned();
        for (i, l) in self.layers.iter().enumerate().rev() {
            let y = &trace.values[i + 1];
            if l.activation != Activation::Linear {
                let act = l.activation;
                ndarray::Zip::from(&mut g).and(y).for_each(|gv, &yv| *gv *= act.derivative_from_output(yv));
            }
            let x = &trace.values[i];
            let gl = &mut grads.layers[i];
            ndarray::linalg::general_mat_mul(1.0, &x.t(), &g, 1.0, &mut gl.weight);
            gl.bias += &g.sum_axis(Axis(0));
            g = g.dot(&l.weight.t());
        }
        g
    }

    /// Rounds every parameter to the nearest `f32`.
    pub fn quantize_f32(&mut self) {
        for s in self.param_slices_mut() {
            s.iter_mut().for_each(|v| *v = *v as f32 as f64);
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for s in self.param_slices_mut() {
            s.iter_mut().for_each(|v| *v *= factor);
        }
    }
}
