use crate::{par, Error, Result, Vec3};

use super::kdtree::KdTree;

/// Largest cloud solved exactly unless the caller raises the cap.
pub const DEFAULT_EMD_CAP: usize = 512;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EmdOptions {
    pub cap: usize,
    /// Above the cap, fall back to greedy matching instead of failing.
    pub approximate: bool,
}

impl Default for EmdOptions {
    fn default() -> Self {
        Self { cap: DEFAULT_EMD_CAP, approximate: false }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EmdResult {
    /// Mean matched distance.
    pub value: f64,
    pub exact: bool,
    /// Larger of the two directional mean nearest-neighbour distances; no
    /// perfect matching can do better.
    pub lower_bound: f64,
}

impl EmdResult {
    /// Upper bound on how far `value` may exceed the optimum.
    pub fn suboptimality(&self) -> f64 {
        if self.exact {
            0.0
        } else {
            self.value - self.lower_bound
        }
    }
}

fn check(a: &[Vec3], b: &[Vec3]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::CorrespondenceMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(Error::EmptyCloud);
    }
    Ok(())
}

/// Exact earth mover's distance under the default cap.
pub fn emd(a: &[Vec3], b: &[Vec3]) -> Result<f64> {
    Ok(emd_with(a, b, &EmdOptions::default())?.value)
}

pub fn emd_with(a: &[Vec3], b: &[Vec3], opts: &EmdOptions) -> Result<EmdResult> {
    check(a, b)?;
    let n = a.len();
    let lower_bound = {
        let (ta, tb) = (KdTree::new(a), KdTree::new(b));
        let mean = |from: &[Vec3], t: &KdTree| {
            par::map_slice(from, par::parallel_available(), |p| t.nearest_sq(p).sqrt()).iter().sum::<f64>() / n as f64
        };
        mean(a, &tb).max(mean(b, &ta))
    };
    if n <= opts.cap {
        let cost: Vec<f64> = (0..n * n).map(|k| (a[k / n] - b[k % n]).norm()).collect();
        let assignment = hungarian(n, &cost);
        let total: f64 = assignment.iter().enumerate().map(|(i, &j)| cost[i * n + j]).sum();
        return Ok(EmdResult { value: total / n as f64, exact: true, lower_bound });
    }
    if !opts.approximate {
        return Err(Error::TooLarge { n, cap: opts.cap });
    }
    Ok(EmdResult { value: greedy(a, b), exact: false, lower_bound })
}

/// Minimum-cost perfect assignment on an `n x n` row-major cost matrix,
/// by shortest augmenting paths with vertex potentials. Returns the column
/// assigned to each row.
pub fn hungarian(n: usize, cost: &[f64]) -> Vec<usize> {
    assert_eq!(cost.len(), n * n, "cost matrix must be square");
    // 1-based internal indexing; column 0 is the virtual start.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut col_of = vec![0usize; n];
    for j in 1..=n {
        col_of[row_of[j] - 1] = j - 1;
    }
    col_of
}

/// Matches globally closest pairs first.
fn greedy(a: &[Vec3], b: &[Vec3]) -> f64 {
    let n = a.len();
    let mut pairs: Vec<(f64, u32, u32)> = Vec::with_capacity(n * n);
    for (i, p) in a.iter().enumerate() {
        for (j, q) in b.iter().enumerate() {
            pairs.push(((p - q).norm(), i as u32, j as u32));
        }
    }
    pairs.sort_unstable_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let (mut ua, mut ub) = (vec![false; n], vec![false; n]);
    let (mut total, mut matched) = (0.0, 0);
    for (d, i, j) in pairs {
        let (i, j) = (i as usize, j as usize);
        if !ua[i] && !ub[j] {
            ua[i] = true;
            ub[j] = true;
            total += d;
            matched += 1;
            if matched == n {
                break;
            }
        }
    }
    total / n as f64
}
