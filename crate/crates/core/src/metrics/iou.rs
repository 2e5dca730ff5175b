use crate::geometry::{inside_query, Aabb, TriangleMesh};
use crate::{par, Error, Result, Vec3};

/// Fraction of sign-uncertain voxels above which occupancy is flagged.
pub const UNRELIABLE_FRACTION: f64 = 0.01;

#[derive(Clone, Debug, PartialEq)]
pub struct IouResult {
    pub iou: f64,
    /// Voxels whose inside test needed the ray-parity fallback, over all
    /// tests performed.
    pub uncertain_fraction: f64,
    pub warnings: Vec<String>,
}

/// Intersection over union of the two meshes' occupancies, sampled at the
/// centers of a `resolution`^3 lattice spanning their joint bounds.
pub fn voxel_iou(a: &TriangleMesh, b: &TriangleMesh, resolution: usize) -> Result<IouResult> {
    voxel_iou_with(a, b, resolution, par::parallel_available())
}

pub fn voxel_iou_with(a: &TriangleMesh, b: &TriangleMesh, resolution: usize, parallel: bool) -> Result<IouResult> {
    if resolution < 2 {
        return Err(Error::InvalidResolution(resolution));
    }
    let mut warnings = Vec::new();
    for (name, m) in [("first", a), ("second", b)] {
        if !m.is_empty() && !m.is_watertight() {
            warnings.push(format!("{name} mesh is not watertight; occupancy relies on the winding number"));
        }
    }
    let bbox = match (a.bounds(), b.bounds()) {
        (Some(x), Some(y)) => x.union(&y),
        (Some(x), None) | (None, Some(x)) => x,
        (None, None) => return Ok(IouResult { iou: 1.0, uncertain_fraction: 0.0, warnings }),
    };
    let ext = bbox.extent();
    let r = resolution;
    let center = |idx: usize| {
        let (i, j, k) = (idx % r, (idx / r) % r, idx / (r * r));
        bbox.min
            + Vec3::new(
                (i as f64 + 0.5) * ext.x / r as f64,
                (j as f64 + 0.5) * ext.y / r as f64,
                (k as f64 + 0.5) * ext.z / r as f64,
            )
    };
    let occupancy = |m: &TriangleMesh, bb: Option<Aabb>, p: &Vec3| match bb {
        Some(bb) if bb.contains(p) => inside_query(m, p),
        _ => (false, false),
    };
    let (ba, bb) = (a.bounds(), b.bounds());
    let cells = par::map_range(r * r * r, parallel, |idx| {
        let p = center(idx);
        let (ia, ua) = occupancy(a, ba, &p);
        let (ib, ub) = occupancy(b, bb, &p);
        (ia, ib, ua as usize + ub as usize)
    });
    let inter = cells.iter().filter(|c| c.0 && c.1).count();
    let union = cells.iter().filter(|c| c.0 || c.1).count();
    let uncertain = cells.iter().map(|c| c.2).sum::<usize>() as f64 / (2 * cells.len()) as f64;
    if uncertain > UNRELIABLE_FRACTION {
        warnings.push(format!("UnreliableOccupancy: {:.2}% of inside tests were sign-uncertain", 100.0 * uncertain));
    }
    let iou = if union == 0 { 1.0 } else { inter as f64 / union as f64 };
    Ok(IouResult { iou, uncertain_fraction: uncertain, warnings })
}
