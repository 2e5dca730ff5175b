use crate::Vec3;

use super::{unsigned_distance, TriangleMesh};

/// Winding numbers within this distance of 0.5 are treated as ambiguous and
/// resolved by ray parity.
pub const UNCERTAIN_BAND: f64 = 0.1;

/// Triangles with smaller area are skipped when accumulating solid angles.
const MIN_WINDING_AREA: f64 = 1e-12;

/// Generalized winding number of the mesh around `p`: the signed solid angle
/// subtended by all triangles divided by 4π. Close to 1 inside a closed,
/// outward-oriented surface and close to 0 outside.
pub fn winding_number(mesh: &TriangleMesh, p: &Vec3) -> f64 {
    let verts = mesh.vertices();
    let mut total = 0.0;
    for f in mesh.faces() {
        let (va, vb, vc) = (verts[f[0]], verts[f[1]], verts[f[2]]);
        if (vb - va).cross(&(vc - va)).norm() * 0.5 < MIN_WINDING_AREA {
            continue;
        }
        let (a, b, c) = (va - p, vb - p, vc - p);
        let (la, lb, lc) = (a.norm(), b.norm(), c.norm());
        let num = a.dot(&b.cross(&c));
        let den = la * lb * lc + a.dot(&b) * lc + a.dot(&c) * lb + b.dot(&c) * la;
        total += 2.0 * num.atan2(den);
    }
    total / (4.0 * std::f64::consts::PI)
}

/// Möller–Trumbore ray/triangle test; returns the ray parameter of a hit.
fn ray_hits_triangle(origin: &Vec3, dir: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> Option<f64> {
    let e1 = b - a;
    let e2 = c - a;
    let h = dir.cross(&e2);
    let det = e1.dot(&h);
    if det.abs() < 1e-15 {
        return None;
    }
    let inv = 1.0 / det;
    let s = origin - a;
    let u = s.dot(&h) * inv;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let q = s.cross(&e1);
    let v = dir.dot(&q) * inv;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    let t = e2.dot(&q) * inv;
    (t > 0.0).then_some(t)
}

/// Inside test by crossing parity along the +x, +y and +z rays, decided by
/// majority vote.
pub fn ray_parity_inside(mesh: &TriangleMesh, p: &Vec3) -> bool {
    let votes = [Vec3::x(), Vec3::y(), Vec3::z()]
        .iter()
        .filter(|dir| {
            let hits = mesh.triangles().filter(|[a, b, c]| ray_hits_triangle(p, dir, a, b, c).is_some()).count();
            hits % 2 == 1
        })
        .count();
    votes >= 2
}

/// Signed distance plus a flag telling whether the sign came from the
/// ray-parity fallback.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SignedDistance {
    pub value: f64,
    pub uncertain: bool,
}

/// Decides inside/outside: winding number above 0.5 means inside, with a
/// ray-parity fallback inside the uncertainty band.
pub(crate) fn inside_query(mesh: &TriangleMesh, p: &Vec3) -> (bool, bool) {
    let w = winding_number(mesh, p);
    if (w - 0.5).abs() < UNCERTAIN_BAND {
        (ray_parity_inside(mesh, p), true)
    } else {
        (w > 0.5, false)
    }
}

pub fn signed_distance_query(mesh: &TriangleMesh, p: &Vec3) -> SignedDistance {
    let d = unsigned_distance(mesh, p);
    if d == 0.0 {
        return SignedDistance { value: 0.0, uncertain: false };
    }
    let (inside, uncertain) = inside_query(mesh, p);
    SignedDistance { value: if inside { -d } else { d }, uncertain }
}

/// Exact distance to the mesh, negative inside.
pub fn signed_distance(mesh: &TriangleMesh, p: &Vec3) -> f64 {
    signed_distance_query(mesh, p).value
}
