//! Sparse solvers over a fixed dictionary.

mod admm;
mod spice;

use serde::{Deserialize, Serialize};

pub use admm::{lasso_admm, lasso_objective, LassoConfig, XStepSolver};
pub use spice::{spice, spice_criterion, SpiceConfig};

use crate::dict::Dictionary;
use crate::error::{invalid, Error, Result};
use crate::numerics::{Cholesky, C64};

/// Default relative threshold separating active from inactive coefficients.
pub const DEFAULT_EPS_ACT: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    /// LASSO: the final `z` iterate. SPICE: the column powers `p` (real).
    pub coefficients: Vec<C64>,
    pub active_set: Vec<usize>,
    pub iterations: usize,
    pub objective: f64,
    pub converged: bool,
    /// Criterion value after every SPICE iteration; empty for LASSO.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub criterion_trace: Vec<f64>,
}

/// Indices with `|c_i| > eps_act · max_j |c_j|`. Empty when all are zero.
pub fn active_indices(coefficients: &[C64], eps_act: f64) -> Vec<usize> {
    let max = coefficients.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return Vec::new();
    }
    let cut = eps_act * max;
    coefficients
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm() > cut)
        .map(|(i, _)| i)
        .collect()
}

/// Complex soft threshold: shrinks every modulus by `kappa`, clamping at zero
/// and keeping the phase.
pub fn soft_threshold(v: &[C64], kappa: f64) -> Vec<C64> {
    v.iter().map(|&x| shrink(x, kappa)).collect()
}

#[inline]
pub(crate) fn shrink(x: C64, kappa: f64) -> C64 {
    let m = x.norm();
    let keep = m - kappa;
    if keep <= 0.0 {
        C64::new(0.0, 0.0)
    } else {
        // keep / (keep + kappa) == keep / |x|
        x * (keep / (keep + kappa))
    }
}

/// Smallest λ for which the LASSO solution is identically zero: `max_i |dᵢᴴ y|`.
pub fn lambda_max(dict: &Dictionary, y: &[C64]) -> Result<f64> {
    Ok(dict
        .matrix()
        .hermitian_product(y)?
        .iter()
        .map(|c| c.norm())
        .fold(0.0, f64::max))
}

/// `alpha · lambda_max`, with `0 < alpha ≤ 1`.
pub fn lambda_heuristic(dict: &Dictionary, y: &[C64], alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(invalid(format!("alpha {alpha} outside (0, 1]")));
    }
    Ok(alpha * lambda_max(dict, y)?)
}

/// Least-squares amplitudes on the `support` columns, mapped back through the
/// stored column norms to the scale of the unnormalized atoms.
pub fn estimate_amplitudes(dict: &Dictionary, y: &[C64], support: &[usize]) -> Result<Vec<C64>> {
    if support.is_empty() {
        return Err(invalid("empty support"));
    }
    if support.len() > dict.rows() {
        return Err(Error::RankDeficient);
    }
    if let Some(&bad) = support.iter().find(|&&j| j >= dict.len()) {
        return Err(invalid(format!("support index {bad} out of range")));
    }
    let sub = dict.matrix().select_columns(support);
    let gram = sub.gram();
    let chol = Cholesky::factor(&gram).map_err(|_| Error::RankDeficient)?;
    let (lo, hi) = chol.diag_range();
    // diag(L)² bounds the pivots; a tiny ratio means near-collinear columns
    if lo * lo < 1e-12 * hi * hi {
        return Err(Error::RankDeficient);
    }
    let rhs = sub.hermitian_product(y)?;
    let mut c = chol.solve(&rhs);
    // one refinement step against the normal equations
    let gc = gram.mul_vec(&c)?;
    let r: Vec<C64> = rhs.iter().zip(&gc).map(|(a, b)| a - b).collect();
    for (ci, d) in c.iter_mut().zip(chol.solve(&r)) {
        *ci += d;
    }
    Ok(c.into_iter()
        .zip(support)
        .map(|(ci, &j)| ci / dict.column_norms()[j])
        .collect())
}
