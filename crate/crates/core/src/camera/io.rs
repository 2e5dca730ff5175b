//! Pose files (`bx1 bx2 bx3 by1 by2 by3 t1 t2 t3` on one line) and
//! correspondence files (`xw yw zw xg yg zg` per line).

use std::fs;
use std::path::Path;

use crate::{Error, Result, Vec3};

use super::{CameraPose, Rotation6D};

pub fn format_pose(pose: &CameraPose) -> String {
    let b = pose.to_6d();
    let t = pose.translation();
    let vals: Vec<String> = b.to_array().iter().chain(t.iter()).map(|v| v.to_string()).collect();
    vals.join(" ") + "\n"
}

pub fn parse_pose(text: &str) -> Result<CameraPose> {
    let (lineno, line) = text
        .lines()
        .enumerate()
        .find(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .ok_or_else(|| Error::parse(1, "empty pose file"))?;
    let vals: Vec<f64> = line
        .split_whitespace()
        .map(|t| t.parse::<f64>().map_err(|_| Error::parse(lineno + 1, format!("invalid number `{t}`"))))
        .collect::<Result<_>>()?;
    if vals.len() != 9 {
        return Err(Error::parse(lineno + 1, format!("expected 9 values, found {}", vals.len())));
    }
    CameraPose::from_6d(&Rotation6D::from_slice(&vals[..6]), Vec3::new(vals[6], vals[7], vals[8]))
}

pub fn save_pose(path: &Path, pose: &CameraPose) -> Result<()> {
    Ok(fs::write(path, format_pose(pose))?)
}

pub fn load_pose(path: &Path) -> Result<CameraPose> {
    parse_pose(&fs::read_to_string(path)?)
}

pub fn parse_correspondences(text: &str) -> Result<(Vec<Vec3>, Vec<Vec3>)> {
    let mut world = Vec::new();
    let mut cam = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| Error::parse(n + 1, format!("invalid number `{t}`"))))
            .collect::<Result<_>>()?;
        if v.len() != 6 {
            return Err(Error::parse(n + 1, format!("expected 6 values, found {}", v.len())));
        }
        world.push(Vec3::new(v[0], v[1], v[2]));
        cam.push(Vec3::new(v[3], v[4], v[5]));
    }
    Ok((world, cam))
}

pub fn format_correspondences(world: &[Vec3], cam: &[Vec3]) -> String {
    world.iter().zip(cam).map(|(w, c)| format!("{} {} {} {} {} {}\n", w.x, w.y, w.z, c.x, c.y, c.z)).collect()
}

pub fn load_correspondences(path: &Path) -> Result<(Vec<Vec3>, Vec<Vec3>)> {
    parse_correspondences(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pose_text_round_trip() {
        let pose = CameraPose::look_at(Vec3::new(0.3, 0.8, -2.0), Vec3::zeros(), Vec3::y()).unwrap();
        let back = parse_pose(&format_pose(&pose)).unwrap();
        assert!((back.rotation() - pose.rotation()).abs().max() < 1e-12);
        assert_eq!(back.translation(), pose.translation());
        assert_eq!(parse_pose("1 0 0 0 1 0 0 0 2\n").unwrap().translation(), &Vec3::new(0.0, 0.0, 2.0));
        assert!(parse_pose("1 0 0 0 1 0 0 0\n").is_err());
        assert!(matches!(parse_pose("0 0 0 0 1 0 0 0 2"), Err(Error::DegenerateRotation(_))));
    }

    #[test]
    fn correspondences() {
        let (w, c) = parse_correspondences("# header\n0 0 0 1 1 1\n1 2 3 4 5 6\n").unwrap();
        assert_eq!(w.len(), 2);
        assert_eq!(c[1], Vec3::new(4.0, 5.0, 6.0));
        assert!(parse_correspondences("1 2 3\n").is_err());
    }
}
