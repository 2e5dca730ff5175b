use crate::{Error, Mat3, Result, Vec3};

/// Continuous rotation parameterization by two 3-vectors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rotation6D {
    pub bx: Vec3,
    pub by: Vec3,
}

const DEGENERATE: f64 = 1e-9;
const ORTHO_TOL: f64 = 1e-6;

impl Rotation6D {
    pub fn new(bx: Vec3, by: Vec3) -> Self {
        Self { bx, by }
    }

    pub fn identity() -> Self {
        Self::new(Vec3::x(), Vec3::y())
    }

    pub fn to_array(&self) -> [f64; 6] {
        [self.bx.x, self.bx.y, self.bx.z, self.by.x, self.by.y, self.by.z]
    }

    pub fn from_slice(v: &[f64]) -> Self {
        Self::new(Vec3::new(v[0], v[1], v[2]), Vec3::new(v[3], v[4], v[5]))
    }

    pub fn is_degenerate(&self) -> bool {
        self.bx.norm() <= DEGENERATE || self.bx.cross(&self.by).norm() <= DEGENERATE
    }
}

/// Intermediate quantities of the orthonormalization, kept for the backward
/// pass.
struct Frame {
    rx: Vec3,
    ry: Vec3,
    rz: Vec3,
    bx_norm: f64,
    u_norm: f64,
}

fn frame(b: &Rotation6D) -> Result<Frame> {
    if b.is_degenerate() {
        return Err(Error::DegenerateRotation(format!("bx = {:?}, by = {:?}", b.bx.as_slice(), b.by.as_slice())));
    }
    let bx_norm = b.bx.norm();
    let rx = b.bx / bx_norm;
    let u = rx.cross(&b.by);
    let u_norm = u.norm();
    if u_norm <= DEGENERATE {
        return Err(Error::DegenerateRotation("bx and by are parallel".into()));
    }
    let rz = u / u_norm;
    let ry = rz.cross(&rx);
    Ok(Frame { rx, ry, rz, bx_norm, u_norm })
}

/// `Rx = N(bx)`, `Rz = N(Rx × by)`, `Ry = Rz × Rx`, stacked as rows.
pub fn rotation_from_6d(b: &Rotation6D) -> Result<Mat3> {
    let f = frame(b)?;
    Ok(Mat3::from_rows(&[f.rx.transpose(), f.ry.transpose(), f.rz.transpose()]))
}

/// Pulls a gradient with respect to the rotation matrix back to `(bx, by)`.
pub fn rotation_from_6d_backward(b: &Rotation6D, grad_r: &Mat3) -> Result<(Vec3, Vec3)> {
    let f = frame(b)?;
    let mut g_rx: Vec3 = grad_r.row(0).transpose();
    let g_ry: Vec3 = grad_r.row(1).transpose();
    let mut g_rz: Vec3 = grad_r.row(2).transpose();

    // Ry = Rz × Rx
    g_rz += f.rx.cross(&g_ry);
    g_rx += g_ry.cross(&f.rz);
    // Rz = N(u), u = Rx × by
    let g_u = (g_rz - f.rz * f.rz.dot(&g_rz)) / f.u_norm;
    g_rx += b.by.cross(&g_u);
    let g_by = g_u.cross(&f.rx);
    // Rx = N(bx)
    let g_bx = (g_rx - f.rx * f.rx.dot(&g_rx)) / f.bx_norm;
    Ok((g_bx, g_by))
}

/// Inverse map: the first two rows of `r`.
pub fn six_d_from_rotation(r: &Mat3) -> Result<Rotation6D> {
    let ortho = (r * r.transpose() - Mat3::identity()).abs().max();
    let det = r.determinant();
    if ortho > ORTHO_TOL || (det - 1.0).abs() > ORTHO_TOL {
        return Err(Error::InvalidRotation(format!("|R R^T - I| = {ortho:.3e}, det = {det:.6}")));
    }
    Ok(Rotation6D::new(r.row(0).transpose(), r.row(1).transpose()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_basis_is_identity() {
        assert_eq!(rotation_from_6d(&Rotation6D::identity()).unwrap(), Mat3::identity());
    }

    #[test]
    fn quarter_turn_about_z() {
        let r = rotation_from_6d(&Rotation6D::new(Vec3::y(), -Vec3::x())).unwrap();
        let expected = Mat3::new(0.0, 1.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 1.0);
        assert_eq!(r, expected);
        let b = six_d_from_rotation(&expected).unwrap();
        assert_eq!(b, Rotation6D::new(Vec3::y(), -Vec3::x()));
    }

    #[test]
    fn scaled_and_sheared_inputs() {
        let r = rotation_from_6d(&Rotation6D::new(Vec3::new(2.0, 0.0, 0.0), Vec3::new(1.0, 1.0, 0.0))).unwrap();
        assert_eq!(r, Mat3::identity());
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(
            rotation_from_6d(&Rotation6D::new(Vec3::zeros(), Vec3::y())),
            Err(Error::DegenerateRotation(_))
        ));
        assert!(rotation_from_6d(&Rotation6D::new(Vec3::x(), Vec3::x() * 3.0)).is_err());
    }

    #[test]
    fn rejects_non_rotations() {
        assert!(matches!(six_d_from_rotation(&(Mat3::identity() * 2.0)), Err(Error::InvalidRotation(_))));
        let reflect = Mat3::from_diagonal(&Vec3::new(1.0, 1.0, -1.0));
        assert!(six_d_from_rotation(&reflect).is_err());
    }

    #[test]
    fn backward_matches_finite_differences() {
        let b = Rotation6D::new(Vec3::new(0.3, -1.2, 0.5), Vec3::new(0.9, 0.4, -0.7));
        let g = Mat3::new(0.1, -0.4, 0.2, 0.7, 0.3, -0.5, -0.2, 0.6, 0.9);
        let f = |b: &Rotation6D| rotation_from_6d(b).unwrap().component_mul(&g).sum();
        let (gbx, gby) = rotation_from_6d_backward(&b, &g).unwrap();
        let analytic: Vec<f64> = gbx.iter().chain(gby.iter()).copied().collect();
        for i in 0..6 {
            let h = 1e-6;
            let mut p = b.to_array();
            let mut m = b.to_array();
            p[i] += h;
            m[i] -= h;
            let fd = (f(&Rotation6D::from_slice(&p)) - f(&Rotation6D::from_slice(&m))) / (2.0 * h);
            assert!((fd - analytic[i]).abs() < 1e-7, "component {i}: {fd} vs {}", analytic[i]);
        }
    }
}
