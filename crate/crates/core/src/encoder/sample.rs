use crate::{Error, Result, Vec2};

/// One encoder activation map, row-major with interleaved channels.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMap {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub values: Vec<f64>,
}

impl FeatureMap {
    pub fn zeros(width: usize, height: usize, channels: usize) -> Self {
        Self { width, height, channels, values: vec![0.0; width * height * channels] }
    }

    pub fn texel(&self, x: usize, y: usize) -> &[f64] {
        let o = (y * self.width + x) * self.channels;
        &self.values[o..o + self.channels]
    }

    /// Four `(texel offset, weight)` pairs of the bilinear stencil at
    /// map-space position `(x, y)`, clamped to the texel-center range.
    fn stencil(&self, x: f64, y: f64) -> [(usize, f64); 4] {
        let x = x.clamp(0.0, (self.width - 1) as f64);
        let y = y.clamp(0.0, (self.height - 1) as f64);
        let x0 = x.floor() as usize;
        let y0 = y.floor() as usize;
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let (fx, fy) = (x - x0 as f64, y - y0 as f64);
        let off = |xx: usize, yy: usize| (yy * self.width + xx) * self.channels;
        [
            (off(x0, y0), (1.0 - fx) * (1.0 - fy)),
            (off(x1, y0), fx * (1.0 - fy)),
            (off(x0, y1), (1.0 - fx) * fy),
            (off(x1, y1), fx * fy),
        ]
    }

    fn map_coords(&self, q: &Vec2, image_width: usize, image_height: usize) -> (f64, f64) {
        (q.x * self.width as f64 / image_width as f64, q.y * self.height as f64 / image_height as f64)
    }
}

/// Encoder output: per-layer maps plus the global feature vector.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMapStack {
    pub image_width: usize,
    pub image_height: usize,
    pub layers: Vec<FeatureMap>,
    pub global: Vec<f64>,
}

impl FeatureMapStack {
    /// Total local feature length: the sum of layer channel counts.
    pub fn local_dim(&self) -> usize {
        self.layers.iter().map(|l| l.channels).sum()
    }

    pub fn global_dim(&self) -> usize {
        self.global.len()
    }

    fn same_structure(&self, other: &FeatureMapStack) -> bool {
        self.image_width == other.image_width
            && self.image_height == other.image_height
            && self.global.len() == other.global.len()
            && self.layers.len() == other.layers.len()
            && self
                .layers
                .iter()
                .zip(&other.layers)
                .all(|(a, b)| (a.width, a.height, a.channels) == (b.width, b.height, b.channels))
    }
}

/// Bilinear lookup of `map` at image-pixel position `q`. The position is
/// scaled into the map's own resolution and clamped to the texel-center
/// range, so far-away queries return the nearest border texel.
pub fn bilinear_sample(map: &FeatureMap, q: &Vec2, image_width: usize, image_height: usize) -> Vec<f64> {
    let mut out = vec![0.0; map.channels];
    accumulate_sample(map, q, image_width, image_height, &mut out);
    out
}

fn accumulate_sample(map: &FeatureMap, q: &Vec2, iw: usize, ih: usize, out: &mut [f64]) {
    let (x, y) = map.map_coords(q, iw, ih);
    for (off, w) in map.stencil(x, y) {
        if w == 0.0 {
            continue;
        }
        for (o, v) in out.iter_mut().zip(&map.values[off..off + map.channels]) {
            *o += w * v;
        }
    }
}

/// Concatenation of [`bilinear_sample`] over all layers, in layer order.
pub fn local_features(stack: &FeatureMapStack, q: &Vec2) -> Vec<f64> {
    let mut out = vec![0.0; stack.local_dim()];
    let mut start = 0;
    for map in &stack.layers {
        accumulate_sample(map, q, stack.image_width, stack.image_height, &mut out[start..start + map.channels]);
        start += map.channels;
    }
    out
}

/// Scatters `grad` (with respect to the output of [`local_features`] at `q`)
/// back onto per-layer map gradients laid out like the stack's maps.
pub fn local_features_backward(stack: &FeatureMapStack, q: &Vec2, grad: &[f64], layer_grads: &mut [Vec<f64>]) {
    let mut start = 0;
    for (map, lg) in stack.layers.iter().zip(layer_grads.iter_mut()) {
        let (x, y) = map.map_coords(q, stack.image_width, stack.image_height);
        let g = &grad[start..start + map.channels];
        for (off, w) in map.stencil(x, y) {
            if w == 0.0 {
                continue;
            }
            for (dst, gv) in lg[off..off + map.channels].iter_mut().zip(g) {
                *dst += w * gv;
            }
        }
        start += map.channels;
    }
}

/// Elementwise maximum of global and local features across views.
pub fn pool_multiview(stacks: &[FeatureMapStack], qs: &[Vec2]) -> Result<(Vec<f64>, Vec<f64>)> {
    let first = stacks.first().ok_or_else(|| Error::shape("multi-view pooling needs at least one view"))?;
    if qs.len() != stacks.len() {
        return Err(Error::shape(format!("{} views but {} projected positions", stacks.len(), qs.len())));
    }
    if let Some(i) = stacks.iter().position(|s| !s.same_structure(first)) {
        return Err(Error::shape(format!("view {i} differs structurally from view 0")));
    }
    let mut global = first.global.clone();
    let mut local = local_features(first, &qs[0]);
    for (stack, q) in stacks.iter().zip(qs).skip(1) {
        for (g, v) in global.iter_mut().zip(&stack.global) {
            *g = g.max(*v);
        }
        for (l, v) in local.iter_mut().zip(local_features(stack, q)) {
            *l = l.max(v);
        }
    }
    Ok((global, local))
}

/// `(1 - alpha) * fa + alpha * fb`.
pub fn interpolate_features(fa: &[f64], fb: &[f64], alpha: f64) -> Result<Vec<f64>> {
    if fa.len() != fb.len() {
        return Err(Error::shape(format!("cannot interpolate vectors of length {} and {}", fa.len(), fb.len())));
    }
    Ok(fa.iter().zip(fb).map(|(a, b)| (1.0 - alpha) * a + alpha * b).collect())
}
