//! Complex LASSO by ADMM on the split `min ½‖y − A x‖² + λ‖z‖₁, x = z`.
//!
//! ```text
//! x ← (AᴴA + ρI)⁻¹ (Aᴴy + ρ(z − u))
//! z ← S(x + u, λ/ρ)
//! u ← u + x − z
//! ```
//!
//! The x-step system is factorized once. With more columns than rows the
//! Woodbury identity `(AᴴA + ρI)⁻¹ = ρ⁻¹(I − Aᴴ(ρI + AAᴴ)⁻¹A)` keeps the
//! factorization at N×N.

use serde::{Deserialize, Serialize};

use super::{active_indices, shrink, SolveResult, DEFAULT_EPS_ACT};
use crate::dict::Dictionary;
use crate::error::{invalid, Error, Result};
use crate::numerics::{CMatrix, Cholesky, C64};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LassoConfig {
    pub lambda: f64,
    pub rho: f64,
    pub max_iters: usize,
    pub tol_primal: f64,
    pub tol_dual: f64,
    pub eps_act: f64,
}

impl LassoConfig {
    /// Defaults for a dictionary with `columns` columns: ρ = 1, tolerances
    /// `1e-8·√P`, 5000 iterations.
    pub fn new(lambda: f64, columns: usize) -> Self {
        let tol = 1e-8 * (columns.max(1) as f64).sqrt();
        Self {
            lambda,
            rho: 1.0,
            max_iters: 5000,
            tol_primal: tol,
            tol_dual: tol,
            eps_act: DEFAULT_EPS_ACT,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(invalid(format!(
                "lambda {} must be finite and >= 0",
                self.lambda
            )));
        }
        if !(self.rho > 0.0) || !self.rho.is_finite() {
            return Err(invalid(format!("rho {} must be positive", self.rho)));
        }
        if !(self.tol_primal > 0.0 && self.tol_dual > 0.0) {
            return Err(invalid("ADMM tolerances must be positive"));
        }
        if self.max_iters == 0 {
            return Err(invalid("max_iters must be at least 1"));
        }
        if !(self.eps_act >= 0.0 && self.eps_act < 1.0) {
            return Err(invalid(format!("eps_act {} outside [0, 1)", self.eps_act)));
        }
        Ok(())
    }
}

/// Pre-factorized x-step `(AᴴA + ρI)⁻¹ r`.
#[derive(Debug, Clone)]
pub enum XStepSolver {
    Direct { chol: Cholesky },
    Woodbury { chol: Cholesky, rho: f64 },
}

impl XStepSolver {
    /// Picks Woodbury when the dictionary has more columns than rows.
    pub fn new(a: &CMatrix, rho: f64) -> Result<Self> {
        if a.cols() > a.rows() {
            Self::woodbury(a, rho)
        } else {
            Self::direct(a, rho)
        }
    }

    pub fn direct(a: &CMatrix, rho: f64) -> Result<Self> {
        let mut g = a.gram();
        g.add_diagonal(rho);
        Ok(Self::Direct {
            chol: Cholesky::factor(&g)?,
        })
    }

    pub fn woodbury(a: &CMatrix, rho: f64) -> Result<Self> {
        let mut g = a.outer_gram();
        g.add_diagonal(rho);
        Ok(Self::Woodbury {
            chol: Cholesky::factor(&g)?,
            rho,
        })
    }

    pub fn is_woodbury(&self) -> bool {
        matches!(self, Self::Woodbury { .. })
    }

    pub fn solve(&self, a: &CMatrix, rhs: &[C64]) -> Result<Vec<C64>> {
        match self {
            Self::Direct { chol } => Ok(chol.solve(rhs)),
            Self::Woodbury { chol, rho } => {
                let mut w = a.mul_vec(rhs)?;
                chol.solve_in_place(&mut w);
                let back = a.hermitian_product(&w)?;
                let inv = 1.0 / rho;
                Ok(rhs.iter().zip(back).map(|(r, b)| (r - b) * inv).collect())
            }
        }
    }
}

/// `½‖y − A z‖² + λ Σ|z_i|`.
pub fn lasso_objective(a: &CMatrix, y: &[C64], z: &[C64], lambda: f64) -> Result<f64> {
    let az = a.mul_vec(z)?;
    let fit: f64 = y.iter().zip(&az).map(|(p, q)| (p - q).norm_sqr()).sum();
    let l1: f64 = z.iter().map(|c| c.norm()).sum();
    Ok(0.5 * fit + lambda * l1)
}

pub fn lasso_admm(dict: &Dictionary, y: &[C64], cfg: &LassoConfig) -> Result<SolveResult> {
    cfg.validate()?;
    let a = dict.matrix();
    if y.len() != a.rows() {
        return Err(Error::DimensionMismatch {
            what: "observation length",
            expected: a.rows(),
            got: y.len(),
        });
    }
    if !y.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("observation"));
    }
    let p = a.cols();
    let solver = XStepSolver::new(a, cfg.rho)?;
    let aty = a.hermitian_product(y)?;
    let kappa = cfg.lambda / cfg.rho;

    let zero = C64::new(0.0, 0.0);
    let mut z = vec![zero; p];
    let mut u = vec![zero; p];
    let mut rhs = vec![zero; p];
    let mut iterations = 0;
    let mut converged = false;

    for it in 1..=cfg.max_iters {
        iterations = it;
        for i in 0..p {
            rhs[i] = aty[i] + (z[i] - u[i]) * cfg.rho;
        }
        let x = solver.solve(a, &rhs)?;
        let mut primal = 0.0;
        let mut dual = 0.0;
        for i in 0..p {
            let z_new = shrink(x[i] + u[i], kappa);
            dual += (z_new - z[i]).norm_sqr();
            let r = x[i] - z_new;
            primal += r.norm_sqr();
            u[i] += r;
            z[i] = z_new;
        }
        if !primal.is_finite() {
            return Err(Error::NonFinite("ADMM iterate"));
        }
        if primal.sqrt() <= cfg.tol_primal && cfg.rho * dual.sqrt() <= cfg.tol_dual {
            converged = true;
            break;
        }
    }

    let objective = lasso_objective(a, y, &z, cfg.lambda)?;
    Ok(SolveResult {
        active_set: active_indices(&z, cfg.eps_act),
        coefficients: z,
        iterations,
        objective,
        converged,
        criterion_trace: Vec::new(),
    })
}
