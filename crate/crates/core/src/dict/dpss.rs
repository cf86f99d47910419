//! First discrete prolate spheroidal (Slepian) sequence.
//!
//! The sequence is the top eigenvector of the symmetric tridiagonal matrix
//! that commutes with the time/band-limiting operator:
//!
//! ```text
//! diag[n]   = ((Q − 1 − 2n) / 2)² · cos(2πW)
//! off[n]    = n (Q − n) / 2            (between rows n−1 and n)
//! ```
//!
//! Its eigenvalues are well separated, so bisection on the Sturm sequence
//! followed by a few steps of inverse iteration is accurate and cheap.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::numerics::C64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DpssConfig {
    /// Sequence length.
    pub q: usize,
    /// Half-bandwidth in cycles/sample, `0 < W < 1/2`.
    pub w: f64,
}

impl DpssConfig {
    pub fn new(q: usize, w: f64) -> Result<Self> {
        let cfg = Self { q, w };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.q < 2 {
            return Err(invalid(format!("DPSS length {} < 2", self.q)));
        }
        if !(self.w > 0.0 && self.w < 0.5) {
            return Err(invalid(format!(
                "DPSS half-bandwidth {} outside (0, 1/2)",
                self.w
            )));
        }
        Ok(())
    }
}

/// Unit-norm first Slepian sequence, sign fixed so that it sums positive.
pub fn first_slepian(cfg: DpssConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let q = cfg.q;
    let cw = (2.0 * PI * cfg.w).cos();
    let diag: Vec<f64> = (0..q)
        .map(|n| {
            let h = (q as f64 - 1.0 - 2.0 * n as f64) / 2.0;
            h * h * cw
        })
        .collect();
    // off[n] couples rows n and n+1
    let off: Vec<f64> = (1..q).map(|n| (n * (q - n)) as f64 / 2.0).collect();

    let lambda = largest_eigenvalue(&diag, &off);
    let scale = diag
        .iter()
        .map(|d| d.abs())
        .chain(off.iter().map(|o| 2.0 * o.abs()))
        .fold(1.0f64, f64::max);
    let shift = lambda + scale * 1e-13;

    let mut v = vec![1.0 / (q as f64).sqrt(); q];
    for _ in 0..4 {
        v = solve_shifted(&diag, &off, shift, &v);
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(n > 0.0) || !n.is_finite() {
            return Err(invalid("DPSS inverse iteration broke down"));
        }
        v.iter_mut().for_each(|x| *x /= n);
    }
    if v.iter().sum::<f64>() < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    Ok(v)
}

/// Slepian sequence of `cfg` modulated to `band_center`. Requires the sample
/// instants to be exactly `0, 1, …, Q−1`.
pub fn dpss_atom(band_center: f64, cfg: DpssConfig, times: &[f64]) -> Result<Vec<C64>> {
    check_integer_times(times, cfg.q)?;
    let taper = first_slepian(cfg)?;
    Ok(modulate(&taper, band_center, times))
}

pub(crate) fn check_integer_times(times: &[f64], q: usize) -> Result<()> {
    if times.len() != q {
        return Err(invalid(format!(
            "DPSS length {q} does not match {} samples",
            times.len()
        )));
    }
    if times.iter().enumerate().any(|(n, &t)| t != n as f64) {
        return Err(invalid("DPSS atoms need uniform integer sampling 0..Q-1"));
    }
    Ok(())
}

pub(crate) fn modulate(taper: &[f64], center: f64, times: &[f64]) -> Vec<C64> {
    taper
        .iter()
        .zip(times)
        .map(|(&a, &t)| C64::from_polar(a, 2.0 * PI * center * t))
        .collect()
}

/// Number of eigenvalues strictly below `x` (Sturm count).
fn count_below(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut d = diag[0] - x;
    if d < 0.0 {
        count += 1;
    }
    for i in 1..diag.len() {
        let prev = if d == 0.0 { f64::MIN_POSITIVE } else { d };
        d = diag[i] - x - off[i - 1] * off[i - 1] / prev;
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

fn largest_eigenvalue(diag: &[f64], off: &[f64]) -> f64 {
    let n = diag.len();
    // Gershgorin bounds
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r =
            if i > 0 { off[i - 1].abs() } else { 0.0 } + if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count_below(diag, off, mid) == n {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Solves `(T − s I) x = b` by Gaussian elimination with partial pivoting.
fn solve_shifted(diag: &[f64], off: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    let n = diag.len();
    // row i holds entries at columns i, i+1, i+2 after pivoting
    let mut d: Vec<f64> = diag.iter().map(|v| v - s).collect();
    let mut du: Vec<f64> = off.to_vec();
    du.push(0.0);
    let mut dl: Vec<f64> = off.to_vec();
    let mut du2 = vec![0.0; n];
    let mut x = b.to_vec();

    for i in 0..n.saturating_sub(1) {
        if d[i].abs() >= dl[i].abs() {
            let piv = if d[i] == 0.0 { f64::MIN_POSITIVE } else { d[i] };
            let m = dl[i] / piv;
            d[i + 1] -= m * du[i];
            x[i + 1] -= m * x[i];
            dl[i] = 0.0;
        } else {
            let m = d[i] / dl[i];
            d[i] = dl[i];
            let t = d[i + 1];
            d[i + 1] = du[i] - m * t;
            if i + 1 < n - 1 {
                du2[i] = du[i + 1];
                du[i + 1] = -m * du2[i];
            }
            du[i] = t;
            x.swap(i, i + 1);
            x[i + 1] -= m * x[i];
        }
    }
    for i in (0..n).rev() {
        let mut acc = x[i];
        if i + 1 < n {
            acc -= du[i] * x[i + 1];
        }
        if i + 2 < n {
            acc -= du2[i] * x[i + 2];
        }
        let piv = if d[i] == 0.0 { f64::MIN_POSITIVE } else { d[i] };
        x[i] = acc / piv;
    }
    x
}
