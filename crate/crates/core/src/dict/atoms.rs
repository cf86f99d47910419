use std::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::numerics::C64;

/// `sin(πx) / (πx)` with the removable singularity filled in.
pub(crate) fn sinc(x: f64) -> f64 {
    let px = PI * x;
    if px.abs() < 1e-8 {
        1.0 - px * px / 6.0
    } else {
        px.sin() / px
    }
}

/// Pure sinusoid `exp(2iπ f t)` sampled at `times` (unnormalized).
pub fn narrowband_atom(f: f64, times: &[f64]) -> Vec<C64> {
    times
        .iter()
        .map(|&t| C64::from_polar(1.0, 2.0 * PI * f * t))
        .collect()
}

/// Sinusoids integrated over the band `[f_lo, f_hi]` (unnormalized).
///
/// The textbook closed form `(e^{2iπ f_hi t} − e^{2iπ f_lo t}) / (2iπ t)` is
/// evaluated as `e^{2iπ f_c t} · w · sinc(w t)` with centre `f_c` and width
/// `w`. The two are algebraically identical; the second has no cancellation
/// near `t = 0` and takes the limit `w` there.
pub fn wideband_atom(f_lo: f64, f_hi: f64, times: &[f64]) -> Result<Vec<C64>> {
    if !(f_lo < f_hi) || !f_lo.is_finite() || !f_hi.is_finite() {
        return Err(invalid(format!("empty or invalid band [{f_lo}, {f_hi}]")));
    }
    let width = f_hi - f_lo;
    let center = 0.5 * (f_lo + f_hi);
    Ok(times
        .iter()
        .map(|&t| C64::from_polar(width * sinc(width * t), 2.0 * PI * center * t))
        .collect())
}
