//! Design rule for the first-stage band count: a quadratic fit in `B` and a
//! linear fit in `N` of the min-to-max gain ratio across a wideband atom.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub const THRESHOLD_SINGLE_STAGE: f64 = 0.81;
pub const THRESHOLD_MULTI_STAGE: f64 = 0.66;
/// Ranges the fit was made over.
pub const FIT_BANDS: (usize, usize) = (4, 100);
pub const FIT_SAMPLES: (usize, usize) = (50, 500);

/// `(c₂B² + c₁B + c₀ + c_N·N) / scale` with the printed constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandRatioModel {
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
    pub cn: f64,
    pub scale: f64,
    pub single_stage: f64,
    pub multi_stage: f64,
}

impl Default for BandRatioModel {
    fn default() -> Self {
        Self {
            c2: -0.49,
            c1: 90.0,
            c0: 5546.0,
            cn: -4.0,
            scale: 1e4,
            single_stage: THRESHOLD_SINGLE_STAGE,
            multi_stage: THRESHOLD_MULTI_STAGE,
        }
    }
}

impl BandRatioModel {
    pub fn threshold(&self, stages: usize) -> f64 {
        if stages <= 1 {
            self.single_stage
        } else {
            self.multi_stage
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandRatio {
    pub value: f64,
    /// `(B, N)` lies outside the range the fit was made over.
    pub extrapolated: bool,
}

/// Predicted band-gain ratio. Evaluated in integers (all constants scaled by
/// 100) so the result is the correctly rounded value of the polynomial.
pub fn band_ratio(b: usize, n: usize) -> f64 {
    let (b, n) = (b as i128, n as i128);
    let num = -49 * b * b + 9000 * b + 554_600 - 400 * n;
    num as f64 / 1e6
}

pub fn band_ratio_checked(b: usize, n: usize) -> Result<BandRatio> {
    if b < 2 || n < 1 {
        return Err(invalid(format!(
            "band_ratio needs B >= 2 and N >= 1 (got B={b}, N={n})"
        )));
    }
    let extrapolated = b < FIT_BANDS.0 || b > FIT_BANDS.1 || n < FIT_SAMPLES.0 || n > FIT_SAMPLES.1;
    Ok(BandRatio {
        value: band_ratio(b, n),
        extrapolated,
    })
}

/// The interval of `B ∈ [4, 100]` whose ratio exceeds the stage threshold.
/// The fit is concave in `B`, so the feasible set is an interval.
pub fn feasible_band_range(n: usize, stages: usize) -> Option<(usize, usize)> {
    let t = BandRatioModel::default().threshold(stages);
    let ok: Vec<usize> = (FIT_BANDS.0..=FIT_BANDS.1)
        .filter(|&b| band_ratio(b, n) > t)
        .collect();
    Some((*ok.first()?, *ok.last()?))
}

/// Largest feasible band count. Callers usually fall back to `B = 4` on error.
pub fn recommend_bands(n: usize, stages: usize) -> Result<usize> {
    if n == 0 || stages == 0 {
        return Err(invalid(
            "recommend_bands needs N >= 1 and at least one stage",
        ));
    }
    feasible_band_range(n, stages)
        .map(|(_, hi)| hi)
        .ok_or(Error::NoFeasibleBandCount {
            n,
            threshold: BandRatioModel::default().threshold(stages),
        })
}
