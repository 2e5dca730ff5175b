use ndarray::{concatenate, s, Array1, Array2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::camera::{project_point, CameraPose, Intrinsics};
use crate::encoder::{
    encode_image, encode_image_backward, local_features, local_features_backward, EncoderConfig, EncoderParams,
    FeatureMapStack, Image,
};
use crate::geometry::PointSample;
use crate::{Error, Result, Vec2, Vec3};

use super::loss::{binary_loss_from_logit, binary_loss_grad_logit, sdf_loss, sdf_loss_grad, LossParams};
use super::mlp::{sigmoid, Activation, Mlp, MlpTrace};

/// Decoder arrangement.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelVariant {
    /// Separate global and local decoders whose outputs are summed.
    TwoStream,
    /// One decoder over the concatenation of point, global and local features.
    OneStream,
    /// Two-stream logits passed through a sigmoid: inside probability.
    Binary,
}

impl ModelVariant {
    pub fn name(self) -> &'static str {
        match self {
            ModelVariant::TwoStream => "two_stream",
            ModelVariant::OneStream => "one_stream",
            ModelVariant::Binary => "binary",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "two_stream" | "two-stream" => Some(ModelVariant::TwoStream),
            "one_stream" | "one-stream" => Some(ModelVariant::OneStream),
            "binary" => Some(ModelVariant::Binary),
            _ => None,
        }
    }
}

/// Architecture of an [`SdfModel`].
#[derive(Clone, Debug, PartialEq)]
pub struct ModelConfig {
    pub encoder: EncoderConfig,
    /// Widths of the point-lifting MLP after its 3D input.
    pub lift_dims: Vec<usize>,
    /// Hidden widths of each decoder; every decoder ends in one output.
    pub decoder_hidden: Vec<usize>,
    pub variant: ModelVariant,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            encoder: EncoderConfig::default(),
            lift_dims: vec![64, 256, 512],
            decoder_hidden: vec![512, 256],
            variant: ModelVariant::TwoStream,
        }
    }
}

impl ModelConfig {
    pub fn with_variant(mut self, variant: ModelVariant) -> Self {
        self.variant = variant;
        self
    }

    fn lift_layer_dims(&self) -> Vec<usize> {
        std::iter::once(3).chain(self.lift_dims.iter().copied()).collect()
    }

    fn decoder_dims(&self, input: usize) -> Vec<usize> {
        std::iter::once(input).chain(self.decoder_hidden.iter().copied()).chain(std::iter::once(1)).collect()
    }

    fn point_dim(&self) -> usize {
        *self.lift_dims.last().unwrap_or(&3)
    }
}

/// Image encoder, point-lifting MLP and decoder streams.
///
/// For [`ModelVariant::OneStream`] the single decoder lives in
/// `global_decoder` and `local_decoder` is `None`.
#[derive(Clone, Debug, PartialEq)]
pub struct SdfModel {
    pub variant: ModelVariant,
    pub encoder: EncoderParams,
    pub point_lift: Mlp,
    pub global_decoder: Mlp,
    pub local_decoder: Option<Mlp>,
}

/// Gradients share the model's layout.
pub type ModelGrads = SdfModel;

impl SdfModel {
    /// All weights zero.
    pub fn zeros(cfg: &ModelConfig) -> Self {
        let point = cfg.point_dim();
        let (g, l) = (cfg.encoder.global_dim(), cfg.encoder.local_dim());
        let relu = Activation::Relu;
        let lin = Activation::Linear;
        let (global_decoder, local_decoder) = match cfg.variant {
            ModelVariant::OneStream => (Mlp::zeros(&cfg.decoder_dims(point + g + l), relu, lin), None),
            _ => (
                Mlp::zeros(&cfg.decoder_dims(point + g), relu, lin),
                Some(Mlp::zeros(&cfg.decoder_dims(point + l), relu, lin)),
            ),
        };
        Self {
            variant: cfg.variant,
            encoder: EncoderParams::zeros(cfg.encoder.clone()),
            point_lift: Mlp::zeros(&cfg.lift_layer_dims(), relu, relu),
            global_decoder,
            local_decoder,
        }
    }

    /// Seeded uniform `±sqrt(6 / (fan_in + fan_out))` weights, zero biases.
    /// The output layer of the local decoder starts at zero.
    pub fn init(cfg: &ModelConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let zeros = Self::zeros(cfg);
        let reinit = |m: &Mlp, rng: &mut ChaCha8Rng| {
            let acts: Vec<Activation> = m.layers.iter().map(|l| l.activation).collect();
            Mlp::init(&m.dims(), acts[0], *acts.last().unwrap(), rng)
        };
        let encoder_seed = rand::Rng::random::<u64>(&mut rng);
        let mut model = Self {
            variant: cfg.variant,
            encoder: EncoderParams::init(cfg.encoder.clone(), encoder_seed),
            point_lift: reinit(&zeros.point_lift, &mut rng),
            global_decoder: reinit(&zeros.global_decoder, &mut rng),
            local_decoder: zeros.local_decoder.as_ref().map(|m| reinit(m, &mut rng)),
        };
        // Zero local output layer: a fresh two-stream model predicts exactly
        // what its global-only restriction predicts.
        if let Some(last) = model.local_decoder.as_mut().and_then(|m| m.layers.last_mut()) {
            last.weight.fill(0.0);
            last.bias.fill(0.0);
        }
        model.quantize_f32();
        model
    }

    /// Zero-valued gradient buffer of the same layout.
    pub fn zeros_like(&self) -> ModelGrads {
        Self {
            variant: self.variant,
            encoder: EncoderParams { config: self.encoder.config.clone(), layers: self.encoder.zero_grads() },
            point_lift: self.point_lift.zeros_like(),
            global_decoder: self.global_decoder.zeros_like(),
            local_decoder: self.local_decoder.as_ref().map(Mlp::zeros_like),
        }
    }

    pub fn point_dim(&self) -> usize {
        self.point_lift.output_dim()
    }

    pub fn global_dim(&self) -> usize {
        self.encoder.config.global_dim()
    }

    pub fn local_dim(&self) -> usize {
        self.encoder.config.local_dim()
    }

    /// Checks the declared dimension chain of every component.
    pub fn validate(&self) -> Result<()> {
        self.point_lift.validate()?;
        self.global_decoder.validate()?;
        if self.point_lift.input_dim() != 3 {
            return Err(Error::shape("point lifting MLP must take 3D input"));
        }
        let (p, g, l) = (self.point_dim(), self.global_dim(), self.local_dim());
        match (self.variant, &self.local_decoder) {
            (ModelVariant::OneStream, None) => {
                if self.global_decoder.input_dim() != p + g + l {
                    return Err(Error::shape(format!("one-stream decoder must take {} inputs", p + g + l)));
                }
            }
            (ModelVariant::OneStream, Some(_)) => return Err(Error::shape("one-stream model has a local decoder")),
            (_, None) => return Err(Error::shape("two-stream model lacks a local decoder")),
            (_, Some(local)) => {
                local.validate()?;
                if self.global_decoder.input_dim() != p + g || local.input_dim() != p + l {
                    return Err(Error::shape("decoder inputs do not match point and feature widths"));
                }
                if local.output_dim() != 1 {
                    return Err(Error::shape("local decoder must output a scalar"));
                }
            }
        }
        if self.global_decoder.output_dim() != 1 {
            return Err(Error::shape("decoder must output a scalar"));
        }
        Ok(())
    }

    /// Zeroes the local decoder: the model then predicts with global
    /// features only.
    pub fn restrict_to_global(&mut self) {
        if let Some(local) = self.local_decoder.as_mut() {
            local.scale(0.0);
        }
    }

    /// Parameter slices in declaration order: encoder (per layer kernel,
    /// bias), point lift, global decoder, local decoder.
    pub fn param_slices(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = Vec::new();
        for l in &self.encoder.layers {
            out.push(&l.kernel);
            out.push(&l.bias);
        }
        out.extend(self.point_lift.param_slices());
        out.extend(self.global_decoder.param_slices());
        if let Some(l) = &self.local_decoder {
            out.extend(l.param_slices());
        }
        out
    }

    pub fn param_slices_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = Vec::new();
        for l in &mut self.encoder.layers {
            out.push(&mut l.kernel);
            out.push(&mut l.bias);
        }
        out.extend(self.point_lift.param_slices_mut());
        out.extend(self.global_decoder.param_slices_mut());
        if let Some(l) = &mut self.local_decoder {
            out.extend(l.param_slices_mut());
        }
        out
    }

    /// Number of leading parameter slices that belong to each component:
    /// `[encoder, point_lift, global_decoder, local_decoder]`.
    pub fn group_slice_counts(&self) -> [usize; 4] {
        [
            2 * self.encoder.layers.len(),
            2 * self.point_lift.layers.len(),
            2 * self.global_decoder.layers.len(),
            self.local_decoder.as_ref().map_or(0, |l| 2 * l.layers.len()),
        ]
    }

    pub fn param_count(&self) -> usize {
        self.param_slices().iter().map(|s| s.len()).sum()
    }

    pub fn quantize_f32(&mut self) {
        for s in self.param_slices_mut() {
            s.iter_mut().for_each(|v| *v = *v as f32 as f64);
        }
    }

    pub fn add_scaled(&mut self, other: &SdfModel, factor: f64) {
        for (dst, src) in self.param_slices_mut().into_iter().zip(other.param_slices()) {
            dst.iter_mut().zip(src).for_each(|(d, s)| *d += factor * s);
        }
    }
}

/// Intermediate state of a batched forward pass, kept for the reverse pass.
struct HeadTrace {
    lift: MlpTrace,
    global: MlpTrace,
    local: Option<MlpTrace>,
}

fn broadcast_rows(v: &[f64], rows: usize) -> Array2<f64> {
    Array2::from_shape_fn((rows, v.len()), |(_, j)| v[j])
}

/// Batched forward pass: one scalar per row of `points` (the SDF for
/// regression variants, the logit for the binary variant).
fn forward_heads(
    model: &SdfModel,
    points: Array2<f64>,
    global: &[f64],
    locals: &Array2<f64>,
) -> Result<(Array1<f64>, HeadTrace)> {
    let n = points.nrows();
    if global.len() != model.global_dim() {
        return Err(Error::shape(format!("expected {} global features, got {}", model.global_dim(), global.len())));
    }
    if locals.ncols() != model.local_dim() || locals.nrows() != n {
        return Err(Error::shape(format!("expected {} local features per point", model.local_dim())));
    }
    let lift = model.point_lift.forward(points)?;
    let feat = lift.output();
    let g = broadcast_rows(global, n);
    match &model.local_decoder {
        None => {
            let input = concatenate(Axis(1), &[feat.view(), g.view(), locals.view()]).expect("row counts agree");
            let global_tr = model.global_decoder.forward(input)?;
            let out = global_tr.output().column(0).to_owned();
            Ok((out, HeadTrace { lift, global: global_tr, local: None }))
        }
        Some(local_dec) => {
            let gin = concatenate(Axis(1), &[feat.view(), g.view()]).expect("row counts agree");
            let lin = concatenate(Axis(1), &[feat.view(), locals.view()]).expect("row counts agree");
            let global_tr = model.global_decoder.forward(gin)?;
            let local_tr = local_dec.forward(lin)?;
            let out = &global_tr.output().column(0) + &local_tr.output().column(0);
            Ok((out, HeadTrace { lift, global: global_tr, local: Some(local_tr) }))
        }
    }
}

/// Reverse pass of [`forward_heads`]; returns gradients with respect to the
/// global feature (summed over rows) and the per-row local features.
fn backward_heads(
    model: &SdfModel,
    trace: &HeadTrace,
    grad_out: &Array1<f64>,
    grads: &mut ModelGrads,
) -> (Vec<f64>, Array2<f64>) {
    let n = grad_out.len();
    let (p, g, l) = (model.point_dim(), model.global_dim(), model.local_dim());
    let go = grad_out.view().into_shape_with_order((n, 1)).expect("column");
    let gin = model.global_decoder.backward(&trace.global, go, &mut grads.global_decoder);
    let mut grad_feat = gin.slice(s![.., ..p]).to_owned();
    let grad_global: Vec<f64> = gin.slice(s![.., p..p + g]).sum_axis(Axis(0)).to_vec();
    let grad_local = match (&model.local_decoder, &trace.local) {
        (Some(dec), Some(tr)) => {
            let lin = dec.backward(tr, go, grads.local_decoder.as_mut().expect("matching layout"));
            grad_feat += &lin.slice(s![.., ..p]);
            lin.slice(s![.., p..p + l]).to_owned()
        }
        _ => gin.slice(s![.., p + g..p + g + l]).to_owned(),
    };
    model.point_lift.backward(&trace.lift, grad_feat.view(), &mut grads.point_lift);
    (grad_global, grad_local)
}

fn points_matrix(points: &[Vec3]) -> Array2<f64> {
    Array2::from_shape_fn((points.len(), 3), |(i, j)| points[i][j])
}

fn single(model: &SdfModel, global: &[f64], local: &[f64], p: &Vec3) -> Result<f64> {
    let locals = Array2::from_shape_vec((1, local.len()), local.to_vec()).expect("row");
    Ok(forward_heads(model, points_matrix(&[*p]), global, &locals)?.0[0])
}

fn require(model: &SdfModel, variant: ModelVariant) -> Result<()> {
    if model.variant != variant {
        return Err(Error::InvalidParameter(format!(
            "operation needs a {} model, got {}",
            variant.name(),
            model.variant.name()
        )));
    }
    Ok(())
}

/// Two-stream prediction: global stream plus local stream, sharing the
/// lifted point feature.
pub fn predict_sdf(model: &SdfModel, global: &[f64], local: &[f64], p: &Vec3) -> Result<f64> {
    require(model, ModelVariant::TwoStream)?;
    single(model, global, local, p)
}

/// Single decoder over `[point feature | global | local]`.
pub fn predict_sdf_one_stream(model: &SdfModel, global: &[f64], local: &[f64], p: &Vec3) -> Result<f64> {
    require(model, ModelVariant::OneStream)?;
    single(model, global, local, p)
}

/// Sigmoid of the two-stream sum.
pub fn predict_inside_prob(model: &SdfModel, global: &[f64], local: &[f64], p: &Vec3) -> Result<f64> {
    require(model, ModelVariant::Binary)?;
    Ok(sigmoid(single(model, global, local, p)?))
}

/// Projects `p` with the pose; points at or behind the image plane fall back
/// to the principal point. Returns the pixel and whether projection failed.
pub fn project_or_center(pose: &CameraPose, intr: &Intrinsics, p: &Vec3) -> (Vec2, bool) {
    match project_point(intr, &pose.transform(p)) {
        Ok(q) => (q, false),
        Err(_) => (Vec2::new(intr.cx, intr.cy), true),
    }
}

fn gather_locals(stack: &FeatureMapStack, qs: &[Vec2]) -> Array2<f64> {
    let d = stack.local_dim();
    let mut out = Array2::zeros((qs.len(), d));
    for (mut row, q) in out.rows_mut().into_iter().zip(qs) {
        row.assign(&Array1::from(local_features(stack, q)));
    }
    out
}

/// Scalar field value of a model at world points, seen through one view:
/// the SDF for regression variants and `0.5 - P(inside)` for the binary
/// variant, so that the zero level set is the surface in all cases. Also
/// returns the number of points whose projection fell back to the
/// principal point.
pub fn predict_field(
    model: &SdfModel,
    stack: &FeatureMapStack,
    pose: &CameraPose,
    intr: &Intrinsics,
    points: &[Vec3],
) -> Result<(Vec<f64>, usize)> {
    let mut failures = 0;
    let qs: Vec<Vec2> = points
        .iter()
        .map(|p| {
            let (q, failed) = project_or_center(pose, intr, p);
            failures += failed as usize;
            q
        })
        .collect();
    let locals = gather_locals(stack, &qs);
    let (out, _) = forward_heads(model, points_matrix(points), &stack.global, &locals)?;
    let values = match model.variant {
        ModelVariant::Binary => out.iter().map(|&z| 0.5 - sigmoid(z)).collect(),
        _ => out.to_vec(),
    };
    Ok((values, failures))
}

/// Training objective.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Objective {
    Weighted(LossParams),
    CrossEntropy,
}

impl Objective {
    pub fn for_variant(variant: ModelVariant, lp: LossParams) -> Self {
        match variant {
            ModelVariant::Binary => Objective::CrossEntropy,
            _ => Objective::Weighted(lp),
        }
    }

    fn value_and_grad(&self, out: f64, gt: f64) -> (f64, f64) {
        match self {
            Objective::Weighted(lp) => (sdf_loss(out, gt, lp), sdf_loss_grad(out, gt, lp)),
            Objective::CrossEntropy => (binary_loss_from_logit(out, gt), binary_loss_grad_logit(out, gt)),
        }
    }
}

/// One image with its camera and a set of supervised points.
#[derive(Clone, Copy, Debug)]
pub struct ViewBatch<'a> {
    pub image: &'a Image,
    pub pose: &'a CameraPose,
    pub intrinsics: &'a Intrinsics,
    pub samples: &'a [PointSample],
}

fn check_objective(model: &SdfModel, objective: &Objective) -> Result<()> {
    let ok = matches!(
        (model.variant, objective),
        (ModelVariant::Binary, Objective::CrossEntropy)
            | (ModelVariant::TwoStream | ModelVariant::OneStream, Objective::Weighted(_))
    );
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("objective does not fit a {} model", model.variant.name())))
    }
}

/// Summed loss over all points of all views (forward only).
pub fn batch_loss(model: &SdfModel, views: &[ViewBatch], objective: &Objective) -> Result<f64> {
    check_objective(model, objective)?;
    let mut total = 0.0;
    for v in views {
        let stack = encode_image(v.image, &model.encoder)?;
        let pts: Vec<Vec3> = v.samples.iter().map(|s| s.p).collect();
        let qs: Vec<Vec2> = pts.iter().map(|p| project_or_center(v.pose, v.intrinsics, p).0).collect();
        let (out, _) = forward_heads(model, points_matrix(&pts), &stack.global, &gather_locals(&stack, &qs))?;
        total += out.iter().zip(v.samples).map(|(&o, s)| objective.value_and_grad(o, s.s).0).sum::<f64>();
    }
    Ok(total)
}

/// Summed loss and its gradient with respect to every model parameter,
/// including the encoder through both the global feature and the sampled
/// local features.
pub fn backward(model: &SdfModel, views: &[ViewBatch], objective: &Objective) -> Result<(f64, ModelGrads)> {
    check_objective(model, objective)?;
    let mut grads = model.zeros_like();
    let mut total = 0.0;
    for v in views {
        if v.samples.is_empty() {
            continue;
        }
        let stack = encode_image(v.image, &model.encoder)?;
        let pts: Vec<Vec3> = v.samples.iter().map(|s| s.p).collect();
        let qs: Vec<Vec2> = pts.iter().map(|p| project_or_center(v.pose, v.intrinsics, p).0).collect();
        let (out, trace) = forward_heads(model, points_matrix(&pts), &stack.global, &gather_locals(&stack, &qs))?;
        let mut grad_out = Array1::zeros(out.len());
        for (i, (&o, s)) in out.iter().zip(v.samples).enumerate() {
            let (l, g) = objective.value_and_grad(o, s.s);
            total += l;
            grad_out[i] = g;
        }
        let (grad_global, grad_local) = backward_heads(model, &trace, &grad_out, &mut grads);
        let mut layer_grads: Vec<Vec<f64>> = stack.layers.iter().map(|l| vec![0.0; l.values.len()]).collect();
        for (q, row) in qs.iter().zip(grad_local.rows()) {
            let row = row.to_vec();
            if row.iter().any(|&g| g != 0.0) {
                local_features_backward(&stack, q, &row, &mut layer_grads);
            }
        }
        let enc = encode_image_backward(v.image, &model.encoder, &stack, layer_grads, &grad_global);
        for (dst, src) in grads.encoder.layers.iter_mut().zip(enc) {
            dst.kernel.iter_mut().zip(&src.kernel).for_each(|(d, s)| *d += s);
            dst.bias.iter_mut().zip(&src.bias).for_each(|(d, s)| *d += s);
        }
    }
    Ok((total, grads))
}
