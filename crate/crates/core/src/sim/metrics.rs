//! Estimate-to-truth pairing and the MSE with the outlier rule.

use serde::{Deserialize, Serialize};

use crate::dict::torus_distance;
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsConfig {
    pub outlier_factor: f64,
    /// `1/P` for a narrowband grid, `1/∏B_z` after zooming.
    pub resolution: f64,
}

impl MetricsConfig {
    pub fn new(resolution: f64) -> Self {
        Self {
            outlier_factor: 2.0,
            resolution,
        }
    }

    pub fn threshold(&self) -> f64 {
        self.outlier_factor * self.resolution
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MseOutcome {
    /// `None` when every pair is an outlier.
    pub mse: Option<f64>,
    pub outliers: usize,
    /// `assignment[i]` is the estimate paired with truth `i`.
    pub assignment: Vec<usize>,
    /// Per-dimension toroidal errors of each pair, in truth order.
    pub errors: Vec<Vec<f64>>,
}

fn pair_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| torus_distance(x, y).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Minimum-cost perfect matching on a square cost matrix (Hungarian method
/// with potentials). Returns `assignment[row] = column`.
pub fn min_cost_assignment(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    let inf = f64::INFINITY;
    // 1-based arrays as in the classic formulation; index 0 is a sentinel
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
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
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut out = vec![0usize; n];
    for j in 1..=n {
        if p[j] > 0 {
            out[p[j] - 1] = j - 1;
        }
    }
    out
}

/// Mean squared toroidal error over non-outlier pairs, averaged over
/// dimensions. A pair is an outlier when its error in any dimension exceeds
/// `outlier_factor·resolution`.
pub fn mse(truth: &[Vec<f64>], est: &[Vec<f64>], cfg: &MetricsConfig) -> Result<MseOutcome> {
    if truth.len() != est.len() {
        return Err(Error::DimensionMismatch {
            what: "estimate count",
            expected: truth.len(),
            got: est.len(),
        });
    }
    if !(cfg.outlier_factor > 0.0) || !(cfg.resolution > 0.0) {
        return Err(invalid("outlier factor and resolution must be positive"));
    }
    if let Some(bad) = truth.iter().chain(est).find(|f| f.len() != truth[0].len()) {
        return Err(Error::DimensionMismatch {
            what: "frequency dimensions",
            expected: truth[0].len(),
            got: bad.len(),
        });
    }
    let cost: Vec<Vec<f64>> = truth
        .iter()
        .map(|t| est.iter().map(|e| pair_distance(t, e)).collect())
        .collect();
    let assignment = min_cost_assignment(&cost);
    let thr = cfg.threshold();
    let mut sum = 0.0;
    let mut kept = 0usize;
    let mut outliers = 0usize;
    let mut errors = Vec::with_capacity(truth.len());
    for (i, t) in truth.iter().enumerate() {
        let e = &est[assignment[i]];
        let err: Vec<f64> = t
            .iter()
            .zip(e)
            .map(|(&a, &b)| torus_distance(a, b))
            .collect();
        if err.iter().any(|&d| d > thr) {
            outliers += 1;
        } else {
            sum += err.iter().map(|d| d * d).sum::<f64>() / err.len() as f64;
            kept += 1;
        }
        errors.push(err);
    }
    Ok(MseOutcome {
        mse: (kept > 0).then(|| sum / kept as f64),
        outliers,
        assignment,
        errors,
    })
}
