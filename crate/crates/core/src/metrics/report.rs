use std::fmt::Write;

use crate::geometry::TriangleMesh;
use crate::{Error, Result};

use super::{chamfer, emd_with, sample_surface_points, voxel_iou, EmdOptions};

/// Settings for [`evaluate_meshes`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalOptions {
    pub n_points: usize,
    pub seed: u64,
    pub iou_resolution: usize,
    pub emd: EmdOptions,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self { n_points: 2048, seed: 0, iou_resolution: 32, emd: EmdOptions::default() }
    }
}

/// Metrics between a predicted and a reference mesh. `emd` is `None` when it
/// could not be computed under the requested cap; `notes` says why.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricReport {
    pub cd: f64,
    pub emd: Option<f64>,
    pub iou: f64,
    pub n_points: usize,
    pub notes: Vec<String>,
}

impl MetricReport {
    /// `key=value` lines.
    pub fn to_key_values(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "cd={}", self.cd);
        match self.emd {
            Some(e) => {
                let _ = writeln!(s, "emd={e}");
            }
            None => s.push_str("emd=nan\n"),
        }
        let _ = writeln!(s, "iou={}", self.iou);
        let _ = writeln!(s, "n_points={}", self.n_points);
        for n in &self.notes {
            let _ = writeln!(s, "note={n}");
        }
        s
    }

    /// Scaled table row: CD in units of 1e-3, EMD in units of 1e-2, IoU in
    /// percent.
    pub fn table(&self) -> String {
        let emd = self.emd.map_or_else(|| "-".to_string(), |e| format!("{:.3}", e * 100.0));
        format!(
            "{:>10} {:>10} {:>8}\n{:>10.3} {:>10} {:>8.1}\n",
            "CD(x1e-3)",
            "EMD(x1e-2)",
            "IoU(%)",
            self.cd * 1e3,
            emd,
            self.iou * 100.0
        )
    }
}

/// Samples both surfaces with the same seed and computes chamfer distance,
/// EMD and voxel IoU. Identical meshes score exactly zero.
pub fn evaluate_meshes(pred: &TriangleMesh, reference: &TriangleMesh, opts: &EvalOptions) -> Result<MetricReport> {
    let a = sample_surface_points(pred, opts.n_points, opts.seed)?;
    let b = sample_surface_points(reference, opts.n_points, opts.seed)?;
    let cd = chamfer(&a, &b)?;
    let mut notes = Vec::new();
    let emd = match emd_with(&a, &b, &opts.emd) {
        Ok(r) => {
            if !r.exact {
                notes.push(format!("emd is approximate; at most {} above the optimum", r.suboptimality()));
            }
            Some(r.value)
        }
        Err(e @ Error::TooLarge { .. }) => {
            notes.push(format!("emd skipped: {e}"));
            None
        }
        Err(e) => return Err(e),
    };
    let iou = voxel_iou(pred, reference, opts.iou_resolution)?;
    notes.extend(iou.warnings);
    Ok(MetricReport { cd, emd, iou: iou.iou, n_points: opts.n_points, notes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::shapes::unit_cube;
    use crate::Vec3;

    #[test]
    fn same_mesh_twice() {
        let c = unit_cube();
        let opts = EvalOptions { n_points: 64, iou_resolution: 8, ..Default::default() };
        let r = evaluate_meshes(&c, &c, &opts).unwrap();
        assert_eq!(r.cd, 0.0);
        assert_eq!(r.emd, Some(0.0));
        assert_eq!(r.iou, 1.0);
        assert!(r.to_key_values().contains("n_points=64\n"));
    }

    #[test]
    fn default_count_refuses_exact_emd() {
        let c = unit_cube();
        let opts = EvalOptions { iou_resolution: 8, ..Default::default() };
        let r = evaluate_meshes(&c, &c.translated(Vec3::new(5.0, 0.0, 0.0)), &opts).unwrap();
        assert_eq!(r.emd, None);
        assert_eq!(r.iou, 0.0);
        assert!(r.notes.iter().any(|n| n.contains("emd skipped")));
        assert!(r.to_key_values().contains("emd=nan"));
    }
}
