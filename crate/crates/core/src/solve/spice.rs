//! SPICE covariance fitting with a dictionary `B` augmented by the identity:
//!
//! ```text
//! minimize over p̃ ≥ 0:  yᴴ R⁻¹ y + Σ_k w_k p_k + Σ_n σ_n,
//! R = B diag(p) Bᴴ + diag(σ),  w_k = ‖b_k‖²
//! ```
//!
//! The update is the cyclic minimizer of the augmented criterion
//! `Σ |β_k|²/p_k + w_k p_k` subject to `Σ a_k β_k = y`: for fixed powers the
//! optimal `β_k = p_k a_kᴴR⁻¹y`, and for fixed `β` the optimal power is
//! `|β_k| / √w_k`. Alternating the two never increases the criterion.

use serde::{Deserialize, Serialize};

use super::{active_indices, SolveResult, DEFAULT_EPS_ACT};
use crate::dict::Dictionary;
use crate::error::{invalid, Error, Result};
use crate::numerics::{cdot, CMatrix, Cholesky, C64};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpiceConfig {
    pub max_iters: usize,
    /// Stop when the relative change of the stacked powers falls below this.
    pub tol: f64,
    pub eps_act: f64,
}

impl Default for SpiceConfig {
    fn default() -> Self {
        Self {
            max_iters: 1000,
            tol: 1e-6,
            eps_act: DEFAULT_EPS_ACT,
        }
    }
}

impl SpiceConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(invalid("SPICE tolerance must be positive"));
        }
        if self.max_iters == 0 {
            return Err(invalid("SPICE max_iters must be at least 1"));
        }
        Ok(())
    }
}

/// Noise powers never drop below this fraction of the mean sample power.
const SIGMA_FLOOR: f64 = 1e-12;

struct Evaluation {
    criterion: f64,
    /// `R⁻¹ y`
    ry: Vec<C64>,
}

fn evaluate(
    b: &CMatrix,
    weights: &[f64],
    p: &[f64],
    sigma: &[f64],
    y: &[C64],
) -> Result<Evaluation> {
    let n = b.rows();
    let active: Vec<usize> = (0..p.len()).filter(|&k| p[k] > 0.0).collect();
    let mut scaled = b.select_columns(&active);
    for (c, &k) in active.iter().enumerate() {
        let s = p[k].sqrt();
        scaled.col_mut(c).iter_mut().for_each(|v| *v *= s);
    }
    let mut r = scaled.outer_gram();
    for i in 0..n {
        let v = r.get(i, i) + sigma[i];
        r.set(i, i, v);
    }
    let chol = Cholesky::factor(&r)?;
    let ry = chol.solve(y);
    let fit = cdot(y, &ry).re;
    let penalty: f64 =
        p.iter().zip(weights).map(|(pk, w)| pk * w).sum::<f64>() + sigma.iter().sum::<f64>();
    Ok(Evaluation {
        criterion: fit + penalty,
        ry,
    })
}

/// Value of the covariance-fitting criterion at `(p, sigma)`.
pub fn spice_criterion(dict: &Dictionary, y: &[C64], p: &[f64], sigma: &[f64]) -> Result<f64> {
    let b = dict.matrix();
    let weights: Vec<f64> = (0..b.cols()).map(|k| cdot(b.col(k), b.col(k)).re).collect();
    Ok(evaluate(b, &weights, p, sigma, y)?.criterion)
}

pub fn spice(dict: &Dictionary, y: &[C64], cfg: &SpiceConfig) -> Result<SolveResult> {
    cfg.validate()?;
    let b = dict.matrix();
    let (n, p_len) = (b.rows(), b.cols());
    if y.len() != n {
        return Err(Error::DimensionMismatch {
            what: "observation length",
            expected: n,
            got: y.len(),
        });
    }
    if !y.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("observation"));
    }
    let energy: f64 = y.iter().map(|v| v.norm_sqr()).sum();
    if energy == 0.0 {
        // zero data: the criterion is minimized by zero powers
        return Ok(SolveResult {
            coefficients: vec![C64::new(0.0, 0.0); p_len],
            active_set: Vec::new(),
            iterations: 0,
            objective: 0.0,
            converged: true,
            criterion_trace: vec![0.0],
        });
    }
    let floor = SIGMA_FLOOR * energy / n as f64;
    let weights: Vec<f64> = (0..p_len).map(|k| cdot(b.col(k), b.col(k)).re).collect();

    // matched-filter initialization
    let aty = b.hermitian_product(y)?;
    let mut p: Vec<f64> = aty.iter().map(|c| c.norm_sqr() / n as f64).collect();
    let mut sigma: Vec<f64> = y
        .iter()
        .map(|v| (v.norm_sqr() / n as f64).max(floor))
        .collect();

    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let mut eval = evaluate(b, &weights, &p, &sigma, y)?;
    trace.push(eval.criterion);

    for it in 1..=cfg.max_iters {
        iterations = it;
        let mut change = 0.0;
        let mut total = 0.0;
        let corr = b.hermitian_product(&eval.ry)?;
        for k in 0..p_len {
            let next = p[k] * corr[k].norm() / weights[k].sqrt();
            change += (next - p[k]).powi(2);
            total += p[k] * p[k];
            p[k] = next;
        }
        for i in 0..n {
            let next = (sigma[i] * eval.ry[i].norm()).max(floor);
            change += (next - sigma[i]).powi(2);
            total += sigma[i] * sigma[i];
            sigma[i] = next;
        }
        eval = evaluate(b, &weights, &p, &sigma, y)?;
        let prev = *trace.last().expect("trace seeded");
        debug_assert!(
            eval.criterion <= prev * (1.0 + 1e-9) + 1e-300,
            "SPICE criterion increased: {prev} -> {}",
            eval.criterion
        );
        trace.push(eval.criterion);
        if !eval.criterion.is_finite() {
            return Err(Error::NonFinite("SPICE criterion"));
        }
        if change.sqrt() <= cfg.tol * total.sqrt() {
            converged = true;
            break;
        }
    }

    let coefficients: Vec<C64> = p.iter().map(|&v| C64::new(v, 0.0)).collect();
    Ok(SolveResult {
        active_set: active_indices(&coefficients, cfg.eps_act),
        coefficients,
        iterations,
        objective: eval.criterion,
        converged,
        criterion_trace: trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dict::{build_dictionary, narrowband_atom, AtomKind, BandGrid, SamplingScheme};
    use crate::numerics::RngSeed;
    use rand::Rng;

    fn dict(n: usize, p: usize, kind: AtomKind) -> Dictionary {
        build_dictionary(
            &SamplingScheme::uniform(n),
            &[BandGrid::uniform(p).unwrap()],
            kind,
            None,
        )
        .unwrap()
    }

    #[test]
    fn zero_data_gives_zero_powers() {
        let d = dict(16, 16, AtomKind::Narrowband);
        let r = spice(&d, &vec![C64::new(0.0, 0.0); 16], &SpiceConfig::default()).unwrap();
        assert!(r.coefficients.iter().all(|c| c.norm() == 0.0));
        assert!(r.active_set.is_empty());
    }

    #[test]
    fn on_grid_tone_dominates_and_criterion_decreases() {
        let n = 32;
        let d = dict(n, n, AtomKind::Narrowband);
        let t: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let f = d.cell(9)[0].center();
        let mut rng = RngSeed(4).rng();
        let y: Vec<C64> = narrowband_atom(f, &t)
            .into_iter()
            .map(|v| v + C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5) * 0.05)
            .collect();
        let r = spice(&d, &y, &SpiceConfig::default()).unwrap();
        let best = (0..n)
            .max_by(|&a, &b| r.coefficients[a].re.total_cmp(&r.coefficients[b].re))
            .unwrap();
        assert_eq!(best, 9);
        assert!(r
            .criterion_trace
            .windows(2)
            .all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
        let direct = spice_criterion(
            &d,
            &y,
            &r.coefficients.iter().map(|c| c.re).collect::<Vec<_>>(),
            &[1.0; 32],
        )
        .unwrap();
        assert!(direct.is_finite());
    }

    #[test]
    fn wideband_dictionary_works_too() {
        let n = 40;
        let d = dict(n, 10, AtomKind::WidebandIntegrated);
        let t: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let y = narrowband_atom(0.537, &t);
        let r = spice(&d, &y, &SpiceConfig::default()).unwrap();
        let best = (0..10)
            .max_by(|&a, &b| r.coefficients[a].re.total_cmp(&r.coefficients[b].re))
            .unwrap();
        assert!(d.cell(best)[0].contains(0.537));
    }

    #[test]
    fn dimension_mismatch() {
        let d = dict(8, 8, AtomKind::Narrowband);
        assert!(spice(&d, &[C64::new(1.0, 0.0); 5], &SpiceConfig::default()).is_err());
    }
}
