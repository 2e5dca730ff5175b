//! Model and loss-log persistence.
//!
//! A model file starts with the magic `DISN` and a little-endian `u32`
//! version, followed by a UTF-8 header of `key=value` lines closed by a blank
//! line, then every parameter as a little-endian `f32` in declaration order.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::encoder::{EncoderConfig, EncoderParams};
use crate::{Error, Result};

use super::mlp::{Activation, Dense, Mlp};
use super::model::{ModelVariant, SdfModel};

const MAGIC: &[u8; 4] = b"DISN";
const VERSION: u32 = 1;

fn join<T: ToString>(v: impl IntoIterator<Item = T>) -> String {
    v.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn mlp_header(out: &mut Vec<(String, String)>, name: &str, mlp: &Mlp) {
    out.push((format!("{name}.dims"), join(mlp.dims())));
    out.push((format!("{name}.activations"), join(mlp.layers.iter().map(|l| l.activation.name()))));
}

fn header(model: &SdfModel) -> Vec<(String, String)> {
    let e = &model.encoder.config;
    let mut h = vec![
        ("variant".to_string(), model.variant.name().to_string()),
        ("encoder.input".to_string(), format!("{}x{}x{}", e.input_width, e.input_height, e.input_channels)),
        ("encoder.channels".to_string(), join(&e.channels)),
    ];
    mlp_header(&mut h, "point_lift", &model.point_lift);
    mlp_header(&mut h, "global_decoder", &model.global_decoder);
    if let Some(l) = &model.local_decoder {
        mlp_header(&mut h, "local_decoder", l);
    }
    h.push(("param_count".to_string(), model.param_count().to_string()));
    h
}

pub fn write_model<W: Write>(mut w: W, model: &SdfModel) -> Result<()> {
    model.validate()?;
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    for (k, v) in header(model) {
        writeln!(w, "{k}={v}")?;
    }
    writeln!(w)?;
    for s in model.param_slices() {
        for &v in s {
            w.write_all(&(v as f32).to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

fn parse_list(s: &str, key: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|_| Error::Format(format!("bad value `{t}` for {key}"))))
        .collect()
}

fn mlp_from_header(h: &BTreeMap<String, String>, name: &str) -> Result<Option<Mlp>> {
    let Some(dims) = h.get(&format!("{name}.dims")) else {
        return Ok(None);
    };
    let dims = parse_list(dims, name)?;
    let acts_key = format!("{name}.activations");
    let acts: Vec<Activation> = h
        .get(&acts_key)
        .ok_or_else(|| Error::Format(format!("missing {acts_key}")))?
        .split(',')
        .map(|a| Activation::from_name(a.trim()).ok_or_else(|| Error::Format(format!("unknown activation `{a}`"))))
        .collect::<Result<_>>()?;
    if dims.len() < 2 || acts.len() != dims.len() - 1 {
        return Err(Error::Format(format!("{name} dims and activations disagree")));
    }
    let layers = dims.windows(2).zip(acts).map(|(d, a)| Dense::zeros(d[0], d[1], a)).collect();
    Ok(Some(Mlp { layers }))
}

fn model_from_header(h: &BTreeMap<String, String>) -> Result<SdfModel> {
    let get = |k: &str| h.get(k).ok_or_else(|| Error::Format(format!("model header lacks `{k}`")));
    let variant = ModelVariant::from_name(get("variant")?)
        .ok_or_else(|| Error::Format(format!("unknown variant `{}`", h["variant"])))?;
    let input: Vec<usize> = get("encoder.input")?
        .split('x')
        .map(|t| t.parse::<usize>().map_err(|_| Error::Format("bad encoder.input".into())))
        .collect::<Result<_>>()?;
    if input.len() != 3 {
        return Err(Error::Format("encoder.input must be WxHxC".into()));
    }
    let config = EncoderConfig {
        input_width: input[0],
        input_height: input[1],
        input_channels: input[2],
        channels: parse_list(get("encoder.channels")?, "encoder.channels")?,
    };
    let model = SdfModel {
        variant,
        encoder: EncoderParams::zeros(config),
        point_lift: mlp_from_header(h, "point_lift")?.ok_or_else(|| Error::Format("missing point_lift".into()))?,
        global_decoder: mlp_from_header(h, "global_decoder")?
            .ok_or_else(|| Error::Format("missing global_decoder".into()))?,
        local_decoder: mlp_from_header(h, "local_decoder")?,
    };
    model.validate().map_err(|e| Error::Format(format!("inconsistent model header: {e}")))?;
    if let Some(n) = h.get("param_count") {
        if n.parse::<usize>().ok() != Some(model.param_count()) {
            return Err(Error::Format("param_count does not match the declared layers".into()));
        }
    }
    Ok(model)
}

pub fn read_model<R: BufRead>(mut r: R) -> Result<SdfModel> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("not a DISN model file".into()));
    }
    let mut ver = [0u8; 4];
    r.read_exact(&mut ver)?;
    let version = u32::from_le_bytes(ver);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported model version {version}")));
    }
    let mut h = BTreeMap::new();
    let mut line = String::new();
    loop {
        line.clear();
        if r.read_line(&mut line)? == 0 {
            return Err(Error::Format("model header is not terminated".into()));
        }
        let t = line.trim_end_matches(['\n', '\r']);
        if t.is_empty() {
            break;
        }
        let (k, v) = t.split_once('=').ok_or_else(|| Error::Format(format!("bad header line `{t}`")))?;
        h.insert(k.trim().to_string(), v.trim().to_string());
    }
    let mut model = model_from_header(&h)?;
    let mut buf = [0u8; 4];
    for s in model.param_slices_mut() {
        for v in s.iter_mut() {
            r.read_exact(&mut buf).map_err(|_| Error::Format("model parameters truncated".into()))?;
            *v = f32::from_le_bytes(buf) as f64;
        }
    }
    if r.read(&mut buf)? != 0 {
        return Err(Error::Format("trailing bytes after model parameters".into()));
    }
    Ok(model)
}

pub fn save_model(path: &Path, model: &SdfModel) -> Result<()> {
    write_model(BufWriter::new(File::create(path)?), model)
}

pub fn load_model(path: &Path) -> Result<SdfModel> {
    read_model(BufReader::new(File::open(path)?))
}

/// One `iter loss` line per entry.
pub fn write_loss_log<W: Write>(mut w: W, log: &[f64]) -> Result<()> {
    for (i, l) in log.iter().enumerate() {
        writeln!(w, "{i} {l}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_loss_log<R: BufRead>(r: R) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (n, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut t = line.split_whitespace();
        let it: usize =
            t.next().and_then(|s| s.parse().ok()).ok_or_else(|| Error::parse(n + 1, "missing iteration index"))?;
        if it != out.len() {
            return Err(Error::parse(n + 1, format!("expected iteration {}, found {it}", out.len())));
        }
        let loss: f64 =
            t.next().and_then(|s| s.parse().ok()).ok_or_else(|| Error::parse(n + 1, "missing loss value"))?;
        out.push(loss);
    }
    Ok(out)
}

pub fn save_loss_log(path: &Path, log: &[f64]) -> Result<()> {
    write_loss_log(BufWriter::new(File::create(path)?), log)
}

pub fn load_loss_log(path: &Path) -> Result<Vec<f64>> {
    read_loss_log(BufReader::new(File::open(path)?))
}
