use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

use super::{FeatureMap, FeatureMapStack, Image};

/// Declared encoder architecture.
#[derive(Clone, Debug, PartialEq)]
pub struct EncoderConfig {
    pub input_width: usize,
    pub input_height: usize,
    pub input_channels: usize,
    /// Output channels per stride-2 3x3 convolution layer.
    pub channels: Vec<usize>,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        Self { input_width: 128, input_height: 128, input_channels: 1, channels: vec![8, 16, 32] }
    }
}

impl EncoderConfig {
    /// Sum of layer channels, the local feature length.
    pub fn local_dim(&self) -> usize {
        self.channels.iter().sum()
    }

    pub fn global_dim(&self) -> usize {
        *self.channels.last().unwrap_or(&0)
    }
}

/// 3x3 stride-2 convolution with edge-replicating padding and ReLU.
///
/// `kernel` is laid out `[out][ky][kx][in]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvLayer {
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel: Vec<f64>,
    pub bias: Vec<f64>,
}

impl ConvLayer {
    pub fn zeros(in_channels: usize, out_channels: usize) -> Self {
        Self {
            in_channels,
            out_channels,
            kernel: vec![0.0; out_channels * 9 * in_channels],
            bias: vec![0.0; out_channels],
        }
    }

    fn patch_len(&self) -> usize {
        9 * self.in_channels
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EncoderParams {
    pub config: EncoderConfig,
    pub layers: Vec<ConvLayer>,
}

/// Gradients shaped like [`EncoderParams`] layers.
pub type EncoderGrads = Vec<ConvLayer>;

impl EncoderParams {
    pub fn zeros(config: EncoderConfig) -> Self {
        let mut in_ch = config.input_channels;
        let layers = config
            .channels
            .iter()
            .map(|&out| {
                let l = ConvLayer::zeros(in_ch, out);
                in_ch = out;
                l
            })
            .collect();
        Self { config, layers }
    }

    /// Uniform `±sqrt(6 / (fan_in + fan_out))` kernels with zero biases.
    pub fn init(config: EncoderConfig, seed: u64) -> Self {
        let mut params = Self::zeros(config);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for l in &mut params.layers {
            let bound = (6.0 / (9.0 * (l.in_channels + l.out_channels) as f64)).sqrt();
            for w in &mut l.kernel {
                *w = rng.random_range(-bound..bound);
            }
        }
        params
    }

    pub fn zero_grads(&self) -> EncoderGrads {
        self.layers.iter().map(|l| ConvLayer::zeros(l.in_channels, l.out_channels)).collect()
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.kernel.len() + l.bias.len()).sum()
    }

    /// Layer output sizes `(width, height)`; each layer halves the previous
    /// size with integer division.
    pub fn layer_sizes(&self) -> Vec<(usize, usize)> {
        let mut w = self.config.input_width;
        let mut h = self.config.input_height;
        self.layers
            .iter()
            .map(|_| {
                w /= 2;
                h /= 2;
                (w, h)
            })
            .collect()
    }
}

/// Gathers the 3x3 neighbourhood around input `(2x, 2y)` in `[ky][kx][c]`
/// order, replicating edge texels.
fn gather_patch(input: &[f64], iw: usize, ih: usize, c: usize, x: usize, y: usize, patch: &mut [f64]) {
    let mut o = 0;
    for ky in 0..3 {
        let sy = (2 * y + ky).saturating_sub(1).min(ih - 1);
        for kx in 0..3 {
            let sx = (2 * x + kx).saturating_sub(1).min(iw - 1);
            let src = (sy * iw + sx) * c;
            patch[o..o + c].copy_from_slice(&input[src..src + c]);
            o += c;
        }
    }
}

fn scatter_patch(grad_input: &mut [f64], iw: usize, ih: usize, c: usize, x: usize, y: usize, patch: &[f64]) {
    let mut o = 0;
    for ky in 0..3 {
        let sy = (2 * y + ky).saturating_sub(1).min(ih - 1);
        for kx in 0..3 {
            let sx = (2 * x + kx).saturating_sub(1).min(iw - 1);
            let dst = (sy * iw + sx) * c;
            for (d, p) in grad_input[dst..dst + c].iter_mut().zip(&patch[o..o + c]) {
                *d += p;
            }
            o += c;
        }
    }
}

fn conv_forward(layer: &ConvLayer, input: &[f64], iw: usize, ih: usize) -> FeatureMap {
    let (ow, oh) = (iw / 2, ih / 2);
    let mut out = FeatureMap::zeros(ow, oh, layer.out_channels);
    let plen = layer.patch_len();
    let mut patch = vec![0.0; plen];
    for y in 0..oh {
        for x in 0..ow {
            gather_patch(input, iw, ih, layer.in_channels, x, y, &mut patch);
            let dst = (y * ow + x) * layer.out_channels;
            for o in 0..layer.out_channels {
                let k = &layer.kernel[o * plen..(o + 1) * plen];
                let acc = layer.bias[o] + k.iter().zip(&patch).map(|(a, b)| a * b).sum::<f64>();
                out.values[dst + o] = acc.max(0.0);
            }
        }
    }
    out
}

/// Forward pass: feature stack of every layer's ReLU output and the spatial
/// mean of the last layer as the global feature.
pub fn encode_image(img: &Image, params: &EncoderParams) -> Result<FeatureMapStack> {
    let cfg = &params.config;
    if (img.width(), img.height(), img.channels()) != (cfg.input_width, cfg.input_height, cfg.input_channels) {
        return Err(Error::shape(format!(
            "encoder expects {}x{}x{} input, got {}x{}x{}",
            cfg.input_width,
            cfg.input_height,
            cfg.input_channels,
            img.width(),
            img.height(),
            img.channels()
        )));
    }
    if params.layers.is_empty() || params.layer_sizes().iter().any(|&(w, h)| w == 0 || h == 0) {
        return Err(Error::shape("encoder input too small for its layer count"));
    }
    let mut layers: Vec<FeatureMap> = Vec::with_capacity(params.layers.len());
    for (i, layer) in params.layers.iter().enumerate() {
        let map = match layers.last() {
            None => conv_forward(layer, img.pixels(), img.width(), img.height()),
            Some(prev) => {
                if prev.channels != layer.in_channels {
                    return Err(Error::shape(format!("layer {i} expects {} input channels", layer.in_channels)));
                }
                conv_forward(layer, &prev.values, prev.width, prev.height)
            }
        };
        layers.push(map);
    }
    let last = layers.last().expect("non-empty");
    let texels = (last.width * last.height) as f64;
    let mut global = vec![0.0; last.channels];
    for px in last.values.chunks_exact(last.channels) {
        for (g, v) in global.iter_mut().zip(px) {
            *g += v;
        }
    }
    global.iter_mut().for_each(|g| *g /= texels);
    Ok(FeatureMapStack { image_width: img.width(), image_height: img.height(), layers, global })
}

/// Reverse pass of [`encode_image`].
///
/// `layer_grads` holds the loss gradient with respect to each layer's output
/// map (it is consumed as scratch space); `grad_global` is the gradient with
/// respect to the global feature. Returns parameter gradients.
pub fn encode_image_backward(
    img: &Image,
    params: &EncoderParams,
    stack: &FeatureMapStack,
    mut layer_grads: Vec<Vec<f64>>,
    grad_global: &[f64],
) -> EncoderGrads {
    let mut grads = params.zero_grads();
    let n_layers = params.layers.len();
    {
        let last = &stack.layers[n_layers - 1];
        let inv = 1.0 / (last.width * last.height) as f64;
        for px in layer_grads[n_layers - 1].chunks_exact_mut(last.channels) {
            for (g, gg) in px.iter_mut().zip(grad_global) {
                *g += gg * inv;
            }
        }
    }
    for l in (0..n_layers).rev() {
        let layer = &params.layers[l];
        let out = &stack.layers[l];
        let (input, iw, ih): (&[f64], usize, usize) = if l == 0 {
            (img.pixels(), img.width(), img.height())
        } else {
            let p = &stack.layers[l - 1];
            (&p.values, p.width, p.height)
        };
        let plen = layer.patch_len();
        let mut patch = vec![0.0; plen];
        let mut grad_patch = vec![0.0; plen];
        let mut grad_input = if l > 0 { Some(vec![0.0; input.len()]) } else { None };
        let g_out = std::mem::take(&mut layer_grads[l]);
        let gl = &mut grads[l];
        for y in 0..out.height {
            for x in 0..out.width {
                let base = (y * out.width + x) * out.channels;
                let any_active = (0..out.channels).any(|o| out.values[base + o] > 0.0 && g_out[base + o] != 0.0);
                if !any_active {
                    continue;
                }
                gather_patch(input, iw, ih, layer.in_channels, x, y, &mut patch);
                grad_patch.iter_mut().for_each(|v| *v = 0.0);
                for o in 0..out.channels {
                    // ReLU passes gradient only where the output is positive.
                    if out.values[base + o] <= 0.0 {
                        continue;
                    }
                    let g = g_out[base + o];
                    if g == 0.0 {
                        continue;
                    }
                    gl.bias[o] += g;
                    let k = &layer.kernel[o * plen..(o + 1) * plen];
                    let gk = &mut gl.kernel[o * plen..(o + 1) * plen];
                    for j in 0..plen {
                        gk[j] += g * patch[j];
                        grad_patch[j] += g * k[j];
                    }
                }
                if let Some(gi) = grad_input.as_mut() {
                    scatter_patch(gi, iw, ih, layer.in_channels, x, y, &grad_patch);
                }
            }
        }
        if let Some(gi) = grad_input {
            for (dst, v) in layer_grads[l - 1].iter_mut().zip(gi) {
                *dst += v;
            }
        }
    }
    grads
}
