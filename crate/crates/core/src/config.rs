//! Run configuration files.
//!
//! A config is UTF-8 text with one `key = value` pair per line. `#` starts a
//! comment, keys are dotted (`train.lr`), and relative paths are resolved
//! against the directory of the config file. Unknown keys are rejected.
//!
//! ```text
//! shape = sphere
//! grid.resolution = 64
//! train.iterations = 5000
//! output.model = sphere.disn
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::geometry::shapes::AnalyticShape;
use crate::geometry::Aabb;
use crate::regressor::{LossParams, ModelVariant, TrainConfig};
use crate::{Error, Result, Vec3};

/// Which camera projects query points into the image.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PoseMode {
    GroundTruth,
    /// Pose recovered by fitting correspondences.
    Estimated,
}

/// The shape a run is built from.
#[derive(Clone, Debug, PartialEq)]
pub enum ShapeSpec {
    Analytic(String),
    Mesh(PathBuf),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub shape: ShapeSpec,
    /// Depth image to use instead of rendering one.
    pub image: Option<PathBuf>,
    pub model_out: PathBuf,
    pub loss_log_out: PathBuf,
    pub image_out: Option<PathBuf>,
    /// Ground-truth camera pose of the rendered view.
    pub pose_out: Option<PathBuf>,
    /// Triangulated reference surface of the shape, for `eval`.
    pub reference_out: Option<PathBuf>,
    pub grid_resolution: usize,
    pub grid_half_extent: f64,
    pub sample_count: usize,
    pub sample_sigma: f64,
    pub sample_seed: u64,
    pub eye: Vec3,
    pub target: Vec3,
    pub up: Vec3,
    pub image_width: usize,
    pub image_height: usize,
    pub focal: Option<f64>,
    pub variant: ModelVariant,
    pub model_seed: u64,
    pub train: TrainConfig,
    pub pose_mode: PoseMode,
    pub correspondences: Option<PathBuf>,
    pub held_out_count: usize,
    pub held_out_seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            shape: ShapeSpec::Analytic("sphere".into()),
            image: None,
            model_out: PathBuf::from("model.disn"),
            loss_log_out: PathBuf::from("loss.log"),
            image_out: None,
            pose_out: None,
            reference_out: None,
            grid_resolution: 64,
            grid_half_extent: 0.5,
            sample_count: 2048,
            sample_sigma: 0.1,
            sample_seed: 1,
            eye: Vec3::new(0.5, -0.6, 1.3),
            target: Vec3::zeros(),
            up: Vec3::y(),
            image_width: 128,
            image_height: 128,
            focal: None,
            variant: ModelVariant::TwoStream,
            model_seed: 0,
            train: TrainConfig::default(),
            pose_mode: PoseMode::GroundTruth,
            correspondences: None,
            held_out_count: 2048,
            held_out_seed: 2,
        }
    }
}

const KEYS: &[&str] = &[
    "shape",
    "mesh",
    "image",
    "output.model",
    "output.loss_log",
    "output.image",
    "output.pose",
    "output.reference",
    "grid.resolution",
    "grid.half_extent",
    "sampling.count",
    "sampling.sigma",
    "sampling.seed",
    "camera.eye",
    "camera.target",
    "camera.up",
    "camera.width",
    "camera.height",
    "camera.focal",
    "model.variant",
    "model.seed",
    "train.lr",
    "train.lr_final",
    "train.batch_size",
    "train.iterations",
    "train.seed",
    "train.beta1",
    "train.beta2",
    "train.eps",
    "train.global_only",
    "loss.m1",
    "loss.m2",
    "loss.delta",
    "pose.mode",
    "pose.correspondences",
    "eval.held_out",
    "eval.seed",
];

/// Splits config text into a key map, remembering line numbers.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, (usize, String)>> {
    let mut out = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::parse(n + 1, "expected `key = value`"))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(Error::parse(n + 1, "empty key"));
        }
        if out.insert(k.to_string(), (n + 1, v.to_string())).is_some() {
            return Err(Error::parse(n + 1, format!("duplicate key `{k}`")));
        }
    }
    Ok(out)
}

struct Fields {
    map: BTreeMap<String, (usize, String)>,
    base: PathBuf,
}

impl Fields {
    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.map.get(key) {
            None => Ok(None),
            Some((line, v)) => {
                v.parse::<T>().map(Some).map_err(|_| Error::parse(*line, format!("invalid value `{v}` for `{key}`")))
            }
        }
    }

    fn set<T: std::str::FromStr>(&self, key: &str, dst: &mut T) -> Result<()> {
        if let Some(v) = self.get(key)? {
            *dst = v;
        }
        Ok(())
    }

    fn path(&self, key: &str) -> Option<PathBuf> {
        self.map.get(key).map(|(_, v)| self.base.join(v))
    }

    fn vec3(&self, key: &str, dst: &mut Vec3) -> Result<()> {
        let Some((line, v)) = self.map.get(key) else {
            return Ok(());
        };
        let parts: Vec<f64> = v
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::parse(*line, format!("`{key}` expects x, y, z")))?;
        if parts.len() != 3 {
            return Err(Error::parse(*line, format!("`{key}` expects x, y, z")));
        }
        *dst = Vec3::new(parts[0], parts[1], parts[2]);
        Ok(())
    }
}

impl RunConfig {
    /// Parses config text; relative paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let map = parse_pairs(text)?;
        if let Some(k) = map.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(Error::InvalidParameter(format!("unknown config key `{k}`")));
        }
        let f = Fields { map, base: base.to_path_buf() };
        let mut c = RunConfig::default();
        match (f.map.get("shape"), f.path("mesh")) {
            (Some(_), Some(_)) => return Err(Error::InvalidParameter("set either `shape` or `mesh`, not both".into())),
            (Some((_, name)), None) => c.shape = ShapeSpec::Analytic(name.clone()),
            (None, Some(p)) => c.shape = ShapeSpec::Mesh(p),
            (None, None) => {}
        }
        c.image = f.path("image");
        if let Some(p) = f.path("output.model") {
            c.model_out = p;
        } else {
            c.model_out = base.join(&c.model_out);
        }
        if let Some(p) = f.path("output.loss_log") {
            c.loss_log_out = p;
        } else {
            c.loss_log_out = base.join(&c.loss_log_out);
        }
        c.image_out = f.path("output.image");
        c.pose_out = f.path("output.pose");
        c.reference_out = f.path("output.reference");
        f.set("grid.resolution", &mut c.grid_resolution)?;
        f.set("grid.half_extent", &mut c.grid_half_extent)?;
        f.set("sampling.count", &mut c.sample_count)?;
        f.set("sampling.sigma", &mut c.sample_sigma)?;
        f.set("sampling.seed", &mut c.sample_seed)?;
        f.vec3("camera.eye", &mut c.eye)?;
        f.vec3("camera.target", &mut c.target)?;
        f.vec3("camera.up", &mut c.up)?;
        f.set("camera.width", &mut c.image_width)?;
        f.set("camera.height", &mut c.image_height)?;
        c.focal = f.get("camera.focal")?;
        if let Some((line, v)) = f.map.get("model.variant") {
            c.variant =
                ModelVariant::from_name(v).ok_or_else(|| Error::parse(*line, format!("unknown variant `{v}`")))?;
        }
        f.set("model.seed", &mut c.model_seed)?;
        let t = &mut c.train;
        f.set("train.lr", &mut t.lr)?;
        t.lr_final = t.lr;
        f.set("train.lr_final", &mut t.lr_final)?;
        f.set("train.batch_size", &mut t.batch_size)?;
        f.set("train.iterations", &mut t.iterations)?;
        f.set("train.seed", &mut t.seed)?;
        f.set("train.beta1", &mut t.beta1)?;
        f.set("train.beta2", &mut t.beta2)?;
        f.set("train.eps", &mut t.eps)?;
        f.set("train.global_only", &mut t.global_only)?;
        let (mut m1, mut m2, mut delta) = (t.loss.m1, t.loss.m2, t.loss.delta);
        f.set("loss.m1", &mut m1)?;
        f.set("loss.m2", &mut m2)?;
        f.set("loss.delta", &mut delta)?;
        t.loss = LossParams::new(m1, m2, delta)?;
        if let Some((line, v)) = f.map.get("pose.mode") {
            c.pose_mode = match v.as_str() {
                "ground_truth" | "ground-truth" => PoseMode::GroundTruth,
                "estimated" => PoseMode::Estimated,
                _ => return Err(Error::parse(*line, format!("unknown pose mode `{v}`"))),
            };
        }
        c.correspondences = f.path("pose.correspondences");
        f.set("eval.held_out", &mut c.held_out_count)?;
        f.set("eval.seed", &mut c.held_out_seed)?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn bbox(&self) -> Aabb {
        Aabb::cube(self.grid_half_extent)
    }

    pub fn analytic_shape(&self) -> Option<AnalyticShape> {
        match &self.shape {
            ShapeSpec::Analytic(name) => AnalyticShape::by_name(name),
            ShapeSpec::Mesh(_) => None,
        }
    }

    /// Checks every precondition that can be checked without computing.
    pub fn validate(&self) -> Result<()> {
        match &self.shape {
            ShapeSpec::Analytic(name) => {
                if AnalyticShape::by_name(name).is_none() {
                    return Err(Error::InvalidParameter(format!("unknown shape `{name}`")));
                }
            }
            ShapeSpec::Mesh(p) => require_file(p, "mesh")?,
        }
        if let Some(p) = &self.image {
            require_file(p, "image")?;
        }
        if self.grid_resolution < 2 {
            return Err(Error::InvalidResolution(self.grid_resolution));
        }
        if !(self.grid_half_extent > 0.0 && self.grid_half_extent.is_finite()) {
            return Err(Error::InvalidParameter("grid.half_extent must be positive".into()));
        }
        if self.sample_count == 0 || self.sample_count > self.grid_resolution.pow(3) {
            return Err(Error::InvalidCount(format!("sampling.count must lie in 1..={}", self.grid_resolution.pow(3))));
        }
        if !(self.sample_sigma > 0.0 && self.sample_sigma.is_finite()) {
            return Err(Error::InvalidParameter("sampling.sigma must be positive".into()));
        }
        if self.image_width == 0 || self.image_height == 0 {
            return Err(Error::InvalidParameter("camera image size must be positive".into()));
        }
        if let Some(fl) = self.focal {
            if !(fl > 0.0 && fl.is_finite()) {
                return Err(Error::InvalidParameter("camera.focal must be positive".into()));
            }
        }
        if self.bbox().contains(&self.eye) {
            return Err(Error::InvalidPose("camera.eye lies inside the grid box".into()));
        }
        if (self.target - self.eye).cross(&self.up).norm() < 1e-9 {
            return Err(Error::InvalidPose("camera.up is parallel to the viewing direction".into()));
        }
        self.train.validate()?;
        if self.pose_mode == PoseMode::Estimated {
            match &self.correspondences {
                Some(p) => require_file(p, "correspondence")?,
                None => return Err(Error::InvalidParameter("pose.mode = estimated needs pose.correspondences".into())),
            }
        }
        if self.held_out_count == 0 {
            return Err(Error::InvalidCount("eval.held_out must be at least 1".into()));
        }
        Ok(())
    }
}

fn require_file(p: &Path, what: &str) -> Result<()> {
    if p.is_file() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{what} file {} does not exist", p.display())))
    }
}
