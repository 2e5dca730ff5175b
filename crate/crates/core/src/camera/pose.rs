use crate::{Error, Mat3, Result, Vec2, Vec3};

use super::{rotation_from_6d, rotation_from_6d_backward, six_d_from_rotation, Rotation6D};

pub type PointCloud = Vec<Vec3>;

/// World-to-camera rigid transform `p -> R p + t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CameraPose {
    rotation: Mat3,
    translation: Vec3,
}

impl CameraPose {
    /// Validates that `rotation` is proper orthonormal within 1e-6.
    pub fn new(rotation: Mat3, translation: Vec3) -> Result<Self> {
        six_d_from_rotation(&rotation)?;
        Ok(Self { rotation, translation })
    }

    pub fn identity() -> Self {
        Self { rotation: Mat3::identity(), translation: Vec3::zeros() }
    }

    pub fn from_6d(b: &Rotation6D, translation: Vec3) -> Result<Self> {
        Ok(Self { rotation: rotation_from_6d(b)?, translation })
    }

    /// Camera at `eye` looking at `target`, with image rows running against
    /// `up`.
    pub fn look_at(eye: Vec3, target: Vec3, up: Vec3) -> Result<Self> {
        let forward = target - eye;
        if forward.norm() < 1e-12 {
            return Err(Error::InvalidPose("eye and target coincide".into()));
        }
        let rz = forward.normalize();
        let rx = rz.cross(&up);
        if rx.norm() < 1e-9 {
            return Err(Error::InvalidPose("up vector is parallel to the view direction".into()));
        }
        let rx = rx.normalize();
        let ry = rz.cross(&rx);
        let rotation = Mat3::from_rows(&[rx.transpose(), ry.transpose(), rz.transpose()]);
        Ok(Self { rotation, translation: -(rotation * eye) })
    }

    pub fn rotation(&self) -> &Mat3 {
        &self.rotation
    }

    pub fn translation(&self) -> &Vec3 {
        &self.translation
    }

    pub fn to_6d(&self) -> Rotation6D {
        Rotation6D::new(self.rotation.row(0).transpose(), self.rotation.row(1).transpose())
    }

    /// World-space position of the optical center, `-R^T t`.
    pub fn camera_center(&self) -> Vec3 {
        -(self.rotation.transpose() * self.translation)
    }

    /// `R p + t`.
    pub fn transform(&self, p: &Vec3) -> Vec3 {
        self.rotation * p + self.translation
    }

    pub fn with_translation(&self, translation: Vec3) -> Self {
        Self { translation, ..*self }
    }
}

/// Pinhole intrinsics in pixels.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Intrinsics {
    pub focal: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: usize,
    pub height: usize,
}

impl Intrinsics {
    pub fn new(focal: f64, cx: f64, cy: f64, width: usize, height: usize) -> Result<Self> {
        if focal.is_nan() || focal <= 0.0 {
            return Err(Error::InvalidParameter(format!("focal length must be positive, got {focal}")));
        }
        if !(0.0..=width as f64).contains(&cx) || !(0.0..=height as f64).contains(&cy) {
            return Err(Error::InvalidParameter(format!("principal point ({cx}, {cy}) outside {width}x{height}")));
        }
        Ok(Self { focal, cx, cy, width, height })
    }

    /// Focal length equal to the image width, principal point at the center.
    pub fn for_image(width: usize, height: usize) -> Self {
        Self { focal: width as f64, cx: width as f64 / 2.0, cy: height as f64 / 2.0, width, height }
    }
}

impl Default for Intrinsics {
    fn default() -> Self {
        Self::for_image(128, 128)
    }
}

/// Perspective projection of a camera-space point to pixel coordinates.
pub fn project_point(intr: &Intrinsics, p_cam: &Vec3) -> Result<Vec2> {
    if p_cam.z <= 1e-9 {
        return Err(Error::BehindCamera(p_cam.z));
    }
    Ok(Vec2::new(intr.focal * p_cam.x / p_cam.z + intr.cx, intr.focal * p_cam.y / p_cam.z + intr.cy))
}

fn check_pair(pc_w: &[Vec3], pc_g: &[Vec3]) -> Result<()> {
    if pc_w.len() != pc_g.len() {
        return Err(Error::CorrespondenceMismatch(pc_w.len(), pc_g.len()));
    }
    if pc_w.is_empty() {
        return Err(Error::EmptyCloud);
    }
    Ok(())
}

/// Mean squared distance between `pc_g` and the transformed `pc_w`.
pub fn camera_loss(b: &Rotation6D, t: &Vec3, pc_w: &[Vec3], pc_g: &[Vec3]) -> Result<f64> {
    check_pair(pc_w, pc_g)?;
    let r = rotation_from_6d(b)?;
    let sum: f64 = pc_w.iter().zip(pc_g).map(|(w, g)| (g - (r * w + t)).norm_squared()).sum();
    Ok(sum / pc_w.len() as f64)
}

/// Loss value together with its gradient with respect to `(bx, by, t)`.
#[derive(Clone, Copy, Debug)]
pub struct LossGrad {
    pub loss: f64,
    pub grad_bx: Vec3,
    pub grad_by: Vec3,
    pub grad_t: Vec3,
}

impl LossGrad {
    pub fn to_array(&self) -> [f64; 9] {
        let mut out = [0.0; 9];
        out[..3].copy_from_slice(self.grad_bx.as_slice());
        out[3..6].copy_from_slice(self.grad_by.as_slice());
        out[6..].copy_from_slice(self.grad_t.as_slice());
        out
    }
}

pub fn camera_loss_and_grad(b: &Rotation6D, t: &Vec3, pc_w: &[Vec3], pc_g: &[Vec3]) -> Result<LossGrad> {
    check_pair(pc_w, pc_g)?;
    let r = rotation_from_6d(b)?;
    let n = pc_w.len() as f64;
    let mut loss = 0.0;
    let mut grad_r = Mat3::zeros();
    let mut grad_t = Vec3::zeros();
    for (w, g) in pc_w.iter().zip(pc_g) {
        let res = r * w + t - g;
        loss += res.norm_squared();
        grad_t += res;
        grad_r += res * w.transpose();
    }
    let scale = 2.0 / n;
    let (grad_bx, grad_by) = rotation_from_6d_backward(b, &(grad_r * scale))?;
    Ok(LossGrad { loss: loss / n, grad_bx, grad_by, grad_t: grad_t * scale })
}

/// Mean 3D distance in camera space and mean 2D reprojection distance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PoseMetrics {
    pub d3d: f64,
    pub d2d: f64,
}

pub fn pose_metrics(pred: &CameraPose, gt: &CameraPose, pc_w: &[Vec3], intr: &Intrinsics) -> Result<PoseMetrics> {
    if pc_w.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let mut d3d = 0.0;
    let mut d2d = 0.0;
    for p in pc_w {
        let a = pred.transform(p);
        let b = gt.transform(p);
        d3d += (a - b).norm();
        d2d += (project_point(intr, &a)? - project_point(intr, &b)?).norm();
    }
    let n = pc_w.len() as f64;
    Ok(PoseMetrics { d3d: d3d / n, d2d: d2d / n })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quarter_z() -> CameraPose {
        CameraPose::from_6d(&Rotation6D::new(Vec3::y(), -Vec3::x()), Vec3::zeros()).unwrap()
    }

    #[test]
    fn transforms() {
        let p = Vec3::new(0.3, -2.0, 5.0);
        assert_eq!(CameraPose::identity().transform(&p), p);
        let shifted = CameraPose::identity().with_translation(Vec3::x());
        assert_eq!(shifted.transform(&Vec3::zeros()), Vec3::x());
        assert_eq!(quarter_z().transform(&Vec3::x()), Vec3::new(0.0, -1.0, 0.0));
    }

    #[test]
    fn projection() {
        let intr = Intrinsics::new(100.0, 64.0, 64.0, 128, 128).unwrap();
        assert_eq!(project_point(&intr, &Vec3::z()).unwrap(), Vec2::new(64.0, 64.0));
        assert_eq!(project_point(&intr, &Vec3::new(0.5, 0.0, 1.0)).unwrap(), Vec2::new(114.0, 64.0));
        assert!(matches!(project_point(&intr, &Vec3::new(0.0, 0.0, -1.0)), Err(Error::BehindCamera(_))));
    }

    #[test]
    fn loss_examples() {
        let b = Rotation6D::new(Vec3::new(0.2, 1.0, -0.3), Vec3::new(-0.5, 0.1, 0.8));
        let t = Vec3::new(0.1, 0.2, 2.0);
        let pose = CameraPose::from_6d(&b, t).unwrap();
        let pc: Vec<Vec3> = (0..10).map(|i| Vec3::new(i as f64 * 0.1, (i * i) as f64 * 0.01, -0.2)).collect();
        let gt: Vec<Vec3> = pc.iter().map(|p| pose.transform(p)).collect();
        assert_eq!(camera_loss(&b, &t, &pc, &gt).unwrap(), 0.0);

        let one = camera_loss(&Rotation6D::identity(), &Vec3::x(), &[Vec3::zeros()], &[Vec3::zeros()]).unwrap();
        assert_eq!(one, 1.0);
        let two = camera_loss(&Rotation6D::identity(), &(Vec3::x() * 2.0), &[Vec3::zeros()], &[Vec3::zeros()]).unwrap();
        assert_eq!(two, 4.0);
        assert!(matches!(camera_loss(&b, &t, &pc, &gt[..3]), Err(Error::CorrespondenceMismatch(10, 3))));
    }

    #[test]
    fn metrics() {
        let gt = CameraPose::identity().with_translation(Vec3::new(0.0, 0.0, 2.0));
        let intr = Intrinsics::default();
        let pc = vec![Vec3::zeros(), Vec3::new(0.0, 0.0, 0.3)];
        assert_eq!(pose_metrics(&gt, &gt, &pc, &intr).unwrap(), PoseMetrics { d3d: 0.0, d2d: 0.0 });
        let eps = 0.01;
        let pred = gt.with_translation(Vec3::new(0.0, 0.0, 2.0 + eps));
        let m = pose_metrics(&pred, &gt, &pc, &intr).unwrap();
        assert!((m.d3d - eps).abs() < 1e-12);
        assert!(m.d2d.abs() < 1e-12);
        let behind = gt.with_translation(Vec3::new(0.0, 0.0, -2.0));
        assert!(matches!(pose_metrics(&behind, &gt, &pc, &intr), Err(Error::BehindCamera(_))));
    }

    #[test]
    fn look_at_points_forward() {
        let pose = CameraPose::look_at(Vec3::new(1.0, 2.0, -3.0), Vec3::zeros(), Vec3::y()).unwrap();
        let c = pose.transform(&Vec3::zeros());
        assert!(c.x.abs() < 1e-12 && c.y.abs() < 1e-12 && (c.z - 14f64.sqrt()).abs() < 1e-12);
        assert!((pose.camera_center() - Vec3::new(1.0, 2.0, -3.0)).norm() < 1e-12);
    }
}
