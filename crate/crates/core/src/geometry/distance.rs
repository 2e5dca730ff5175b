use crate::Vec3;

use super::TriangleMesh;

/// Twice-area threshold below which a triangle is treated as a segment or
/// point.
const DEGENERATE_AREA2: f64 = 1e-24;

/// Closest point on the closed triangle `abc` to `p`.
///
/// Voronoi-region walk over vertices, edges and the face interior.
/// Degenerate triangles fall back to the nearest of their three edges.
pub fn closest_point_on_triangle(p: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> Vec3 {
    let ab = b - a;
    let ac = c - a;
    if ab.cross(&ac).norm_squared() <= DEGENERATE_AREA2 {
        return [closest_on_segment(p, a, b), closest_on_segment(p, b, c), closest_on_segment(p, c, a)]
            .into_iter()
            .min_by(|x, y| (x - p).norm_squared().total_cmp(&(y - p).norm_squared()))
            .unwrap();
    }

    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return *a;
    }

    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return *b;
    }

    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return a + ab * v;
    }

    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return *c;
    }

    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return a + ac * w;
    }

    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return b + (c - b) * w;
    }

    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    a + ab * v + ac * w
}

fn closest_on_segment(p: &Vec3, a: &Vec3, b: &Vec3) -> Vec3 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return *a;
    }
    let t = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    a + ab * t
}

/// Euclidean distance from `p` to the closed triangle `abc`.
pub fn point_triangle_distance(p: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    (closest_point_on_triangle(p, a, b, c) - p).norm()
}

/// Minimum distance from `p` to any face of the mesh (infinite for an empty
/// mesh).
pub fn unsigned_distance(mesh: &TriangleMesh, p: &Vec3) -> f64 {
    let verts = mesh.vertices();
    let mut best = f64::INFINITY;
    let mut best2 = f64::INFINITY;
    for f in mesh.faces() {
        let (a, b, c) = (&verts[f[0]], &verts[f[1]], &verts[f[2]]);
        // Cheap rejection: every point of the triangle is at least as far as
        // the distance to its bounding box.
        let lo = a.inf(b).inf(c);
        let hi = a.sup(b).sup(c);
        let gap = (lo - p).sup(&(p - hi)).sup(&Vec3::zeros());
        if gap.norm_squared() >= best2 {
            continue;
        }
        let d = point_triangle_distance(p, a, b, c);
        if d < best {
            best = d;
            best2 = d * d;
        }
    }
    best
}
