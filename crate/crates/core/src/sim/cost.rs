//! Operation-count model of the ADMM x-step and the zooming budget.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Cost of the ADMM x-step with an `N × P` dictionary:
/// `P³ + (N+1)P² + NP` when `P ≤ N`, else `N³ + 3PN² + PN + P²`.
pub fn admm_cost(n: u64, p: u64) -> u64 {
    let (n, p) = (n as u128, p as u128);
    let c = if p <= n {
        p * p * p + (n + 1) * p * p + n * p
    } else {
        n * n * n + 3 * p * n * n + p * n + p * p
    };
    u64::try_from(c).unwrap_or(u64::MAX)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZoomBudget {
    /// Narrowband problem with `P` columns.
    pub c1: f64,
    /// First wideband stage with `B₁ = N` bands.
    pub c2: f64,
    /// Operations left for the zoom stages, `C₁ − C₂`.
    pub residual: f64,
    /// `K·I_z((ηN)³ + (N+1)(ηN)² + ηN²)`.
    pub zoom_cost: f64,
    /// `(C₂ + zoom_cost) / C₁`.
    pub fraction_of_narrowband: f64,
    pub within_budget: bool,
    /// `1 / (N·(ηN)^{I_z})`.
    pub grid: f64,
    /// `1/P`.
    pub narrowband_grid: f64,
}

pub fn zoom_budget(p: usize, n: usize, k: usize, eta: f64, stages: usize) -> Result<ZoomBudget> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(invalid(format!("eta {eta} outside (0, 1)")));
    }
    if p == 0 || n == 0 {
        return Err(invalid("P and N must be positive"));
    }
    let (pf, nf, kf) = (p as f64, n as f64, k as f64);
    let c1 = nf.powi(3) + 3.0 * pf * nf * nf + pf * pf + pf * nf;
    let c2 = 2.0 * (nf.powi(3) + nf * nf);
    let residual = c1 - c2;
    let b = eta * nf;
    let zoom_cost = kf * stages as f64 * (b.powi(3) + (nf + 1.0) * b * b + eta * nf * nf);
    Ok(ZoomBudget {
        c1,
        c2,
        residual,
        zoom_cost,
        fraction_of_narrowband: (c2 + zoom_cost) / c1,
        within_budget: zoom_cost <= residual,
        grid: 1.0 / (nf * b.powi(stages as i32)),
        narrowband_grid: 1.0 / pf,
    })
}

/// Baseline narrowband problem and the band counts of a zoom pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexitySettings {
    pub p: usize,
    pub n: usize,
    pub k: usize,
    pub bands: Vec<usize>,
}

/// Modeled cost of the pipeline relative to the narrowband baseline. Stage 1
/// has `B₁` columns, later stages `K·B_z` (one surviving band per component).
pub fn relative_complexity(s: &ComplexitySettings) -> Result<f64> {
    if s.bands.is_empty() {
        return Err(invalid("at least one stage is needed"));
    }
    let n = s.n as u64;
    let mut total = 0u128;
    for (z, &b) in s.bands.iter().enumerate() {
        let cols = if z == 0 { b } else { s.k * b };
        total += admm_cost(n, cols as u64) as u128;
    }
    Ok(total as f64 / admm_cost(n, s.p as u64) as f64)
}

/// The three wideband rows of the relative-complexity table.
pub fn table1_settings() -> Vec<ComplexitySettings> {
    [vec![20, 5], vec![20, 40], vec![10, 10, 5]]
        .into_iter()
        .map(|bands| ComplexitySettings {
            p: 1000,
            n: 200,
            k: 2,
            bands,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn admm_cost_examples() {
        assert_eq!(admm_cost(100, 2), 612);
        assert_eq!(
            admm_cost(100, 1000),
            1_000_000 + 30_000_000 + 100_000 + 1_000_000
        );
        // P == N takes the P ≤ N branch
        assert_eq!(admm_cost(10, 10), 1000 + 1100 + 100);
        let below = admm_cost(100, 99) as f64;
        let above = admm_cost(100, 101) as f64;
        assert!(above / below < 10.0 && below / above < 10.0);
    }

    #[test]
    fn budget_example() {
        let b = zoom_budget(1000, 100, 5, 2.0 / 3.0, 4).unwrap();
        assert_eq!(b.c2, 2.0 * (1e6 + 1e4));
        assert!(b.within_budget);
        assert!(b.grid > 1e-10 && b.grid < 1e-8, "{}", b.grid);
        assert!((b.fraction_of_narrowband - 0.5).abs() < 0.1);
        assert_eq!(b.narrowband_grid, 1e-3);
        assert!(zoom_budget(1000, 100, 5, 1.0, 4).is_err());
    }

    #[test]
    fn residual_positive_when_p_at_least_n() {
        for n in 2..60usize {
            for p in n..(n + 80) {
                assert!(zoom_budget(p, n, 1, 0.5, 1).unwrap().residual > 0.0);
            }
        }
    }

    #[test]
    fn table_rows() {
        let got: Vec<f64> = table1_settings()
            .iter()
            .map(|s| relative_complexity(s).unwrap())
            .collect();
        for (g, want) in got.iter().zip(["0.001", "0.015", "0.001"]) {
            assert_eq!(format!("{g:.3}"), want);
        }
    }
}
