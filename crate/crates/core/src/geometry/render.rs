use crate::camera::{CameraPose, Intrinsics};
use crate::encoder::Image;
use crate::{par, Error, Result, Vec3};

use super::SdfGrid;

const MAX_STEPS: usize = 1024;
const REFINE_STEPS: usize = 40;

/// Depth image of the zero level set of `grid` seen through a pinhole
/// camera, found by sphere tracing the trilinearly interpolated field.
///
/// Pixel `(u, v)` has its center at `(u, v)` in the projection's pixel
/// coordinates. Hit pixels carry the positive camera-space depth `z`;
/// background pixels are 0.
pub fn render_depth_image(
    grid: &SdfGrid,
    pose: &CameraPose,
    intrinsics: &Intrinsics,
    width: usize,
    height: usize,
) -> Result<Image> {
    let bbox = grid.bbox();
    let eye = pose.camera_center();
    if bbox.contains(&eye) {
        return Err(Error::InvalidPose("camera center lies inside the grid box".into()));
    }
    let rt = pose.rotation().transpose();
    let hit_eps = 1e-4 * grid.cell_size().min(1.0);
    let min_step = 1e-3 * grid.cell_size();

    let pixels = par::map_range(width * height, true, |idx| {
        let (u, v) = ((idx % width) as f64, (idx / width) as f64);
        let ray_cam = Vec3::new((u - intrinsics.cx) / intrinsics.focal, (v - intrinsics.cy) / intrinsics.focal, 1.0);
        let dir = (rt * ray_cam).normalize();
        let Some((t0, t1)) = bbox.ray_interval(&eye, &dir) else {
            return 0.0;
        };
        let mut t_prev = t0;
        let mut t = t0;
        for _ in 0..MAX_STEPS {
            if t > t1 {
                return 0.0;
            }
            let d = grid.sample(&(eye + dir * t));
            if d < hit_eps {
                let t_hit = if d < 0.0 { bisect(grid, &eye, &dir, t_prev, t) } else { t };
                return pose.transform(&(eye + dir * t_hit)).z;
            }
            t_prev = t;
            t += d.max(min_step);
        }
        0.0
    });
    Image::new(width, height, 1, pixels)
}

fn bisect(grid: &SdfGrid, eye: &Vec3, dir: &Vec3, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..REFINE_STEPS {
        let mid = 0.5 * (lo + hi);
        if grid.sample(&(eye + dir * mid)) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
