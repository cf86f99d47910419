//! Spread of the weaker peak in inner-product scans, narrowband vs wideband.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::signal::{add_noise, generate_signal, NoiseSpec, SignalDraw};
use crate::dict::{build_dictionary, inner_product_scan, AtomKind, BandGrid, SamplingScheme};
use crate::error::Result;
use crate::numerics::RngSeed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakStudyConfig {
    pub trials: usize,
    pub snr_db: Vec<f64>,
    pub n: usize,
    /// Columns of both dictionaries.
    pub bands: usize,
    /// Weaker magnitude first.
    pub magnitudes: [f64; 2],
    /// Minimum spacing in units of `1/N`.
    pub spacing: f64,
}

impl Default for PeakStudyConfig {
    fn default() -> Self {
        Self {
            trials: 1000,
            snr_db: vec![0.0, 5.0, 10.0, 15.0, 20.0],
            n: 100,
            bands: 50,
            magnitudes: [4.0, 5.0],
            spacing: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakVariancePoint {
    pub snr_db: f64,
    pub narrowband_mean: f64,
    pub narrowband_std: f64,
    pub wideband_mean: f64,
    pub wideband_std: f64,
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = if v.len() > 1 {
        v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

/// For each SNR: scan both dictionaries, normalize to unit maximum and record
/// the magnitude at the column covering the weaker component.
pub fn peak_variance_study(cfg: &PeakStudyConfig, seed: RngSeed) -> Result<Vec<PeakVariancePoint>> {
    let scheme = SamplingScheme::uniform(cfg.n);
    let grid = vec![BandGrid::uniform(cfg.bands)?];
    let nb = build_dictionary(&scheme, &grid, AtomKind::Narrowband, None)?;
    let wb = build_dictionary(&scheme, &grid, AtomKind::WidebandIntegrated, None)?;
    let draw = SignalDraw::new(1, 2)
        .with_spacing(cfg.spacing / cfg.n as f64)
        .with_magnitudes(cfg.magnitudes.to_vec());

    let mut out = Vec::with_capacity(cfg.snr_db.len());
    for (si, &snr) in cfg.snr_db.iter().enumerate() {
        let samples: Vec<(f64, f64)> = (0..cfg.trials)
            .into_par_iter()
            .map(|t| -> Result<(f64, f64)> {
                let mut rng = seed.derive(si as u64).derive(t as u64).rng();
                let spec = draw.draw(&mut rng)?;
                let clean = generate_signal(&spec, &scheme)?;
                let y = add_noise(&clean, NoiseSpec::new(snr), &mut rng)?;
                let weak = spec.components[0].frequency[0];
                let col = ((weak * cfg.bands as f64).floor() as usize).min(cfg.bands - 1);
                let a = inner_product_scan(&nb, &y, true)?[col];
                let b = inner_product_scan(&wb, &y, true)?[col];
                Ok((a, b))
            })
            .collect::<Result<_>>()?;
        let (nm, ns) = mean_std(&samples.iter().map(|s| s.0).collect::<Vec<_>>());
        let (wm, ws) = mean_std(&samples.iter().map(|s| s.1).collect::<Vec<_>>());
        out.push(PeakVariancePoint {
            snr_db: snr,
            narrowband_mean: nm,
            narrowband_std: ns,
            wideband_mean: wm,
            wideband_std: ws,
        });
    }
    Ok(out)
}
