use std::fs;
use std::path::Path;

use crate::{Error, Result};

/// Row-major, channel-interleaved image with `f64` samples.
#[derive(Clone, Debug, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    channels: usize,
    pixels: Vec<f64>,
}

impl Image {
    pub fn new(width: usize, height: usize, channels: usize, pixels: Vec<f64>) -> Result<Self> {
        if pixels.len() != width * height * channels {
            return Err(Error::shape(format!(
                "{width}x{height}x{channels} image needs {} samples, got {}",
                width * height * channels,
                pixels.len()
            )));
        }
        if pixels.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("image contains non-finite samples".into()));
        }
        Ok(Self { width, height, channels, pixels })
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: f64) -> Self {
        Self { width, height, channels, pixels: vec![value; width * height * channels] }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize, c: usize) -> f64 {
        self.pixels[(y * self.width + x) * self.channels + c]
    }

    /// Maps hit depths in `[near, far]` to `(far - d) / (far - near)` so
    /// that closer surfaces are brighter; background (0) stays 0.
    pub fn normalized_depth(&self, near: f64, far: f64) -> Self {
        let span = far - near;
        let pixels =
            self.pixels.iter().map(|&d| if d > 0.0 { ((far - d) / span).clamp(0.0, 1.0) } else { 0.0 }).collect();
        Self { pixels, ..self.clone() }
    }

    /// Rounds every sample in `[0, 1]` to the nearest 16-bit level, the
    /// precision of the PGM files this crate writes.
    pub fn quantized_u16(&self) -> Self {
        let pixels = self.pixels.iter().map(|&v| (v.clamp(0.0, 1.0) * 65535.0).round() / 65535.0).collect();
        Self { pixels, ..self.clone() }
    }

    /// Binary PGM (P5), 16-bit big-endian samples scaled from `[0, 1]`.
    pub fn to_pgm(&self) -> Result<Vec<u8>> {
        if self.channels != 1 {
            return Err(Error::shape("PGM output needs a single-channel image"));
        }
        let mut out = format!("P5\n{} {}\n65535\n", self.width, self.height).into_bytes();
        for &v in &self.pixels {
            let level = (v.clamp(0.0, 1.0) * 65535.0).round() as u16;
            out.extend_from_slice(&level.to_be_bytes());
        }
        Ok(out)
    }

    /// Reads 8- or 16-bit binary PGM, scaling samples to `[0, 1]`.
    pub fn from_pgm(bytes: &[u8]) -> Result<Self> {
        let mut pos = 0usize;
        let mut fields = Vec::with_capacity(4);
        while fields.len() < 4 {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            let start = pos;
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if start == pos {
                return Err(Error::Format("truncated PGM header".into()));
            }
            fields.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
        }
        pos += 1;
        if fields[0] != "P5" {
            return Err(Error::Format(format!("unsupported PGM magic `{}`", fields[0])));
        }
        let num = |s: &str| s.parse::<usize>().map_err(|_| Error::Format(format!("bad PGM header field `{s}`")));
        let (w, h, maxval) = (num(&fields[1])?, num(&fields[2])?, num(&fields[3])?);
        if maxval == 0 || maxval > 65535 {
            return Err(Error::Format(format!("invalid PGM maxval {maxval}")));
        }
        let bps = if maxval < 256 { 1 } else { 2 };
        let body = bytes.get(pos..).unwrap_or_default();
        if body.len() < w * h * bps {
            return Err(Error::Format("PGM body shorter than header declares".into()));
        }
        let scale = 1.0 / maxval as f64;
        let pixels = (0..w * h)
            .map(|i| {
                let v = if bps == 1 { body[i] as u16 } else { u16::from_be_bytes([body[2 * i], body[2 * i + 1]]) };
                v as f64 * scale
            })
            .collect();
        Image::new(w, h, 1, pixels)
    }

    pub fn save_pgm(&self, path: &Path) -> Result<()> {
        Ok(fs::write(path, self.to_pgm()?)?)
    }

    pub fn load_pgm(path: &Path) -> Result<Self> {
        Self::from_pgm(&fs::read(path)?)
    }
}
