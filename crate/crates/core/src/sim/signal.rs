//! Sinusoid generation and noise injection.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dict::{narrowband_atom, torus_distance, SamplingScheme};
use crate::error::{invalid, Error, Result};
use crate::numerics::{kron_vectors, RngSeed, C64};

/// Rejection attempts before a spacing constraint is declared infeasible.
pub const MAX_SPACING_ATTEMPTS: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    /// One frequency per dimension, cycles/sample in `[0, 1)`.
    pub frequency: Vec<f64>,
    pub amplitude: C64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalSpec {
    pub dims: usize,
    pub components: Vec<Component>,
    /// Per-dimension spacing the components respect, modulo 1.
    pub min_spacing: Option<f64>,
}

impl SignalSpec {
    pub fn k(&self) -> usize {
        self.components.len()
    }

    pub fn frequencies(&self) -> Vec<Vec<f64>> {
        self.components
            .iter()
            .map(|c| c.frequency.clone())
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        for c in &self.components {
            if c.frequency.len() != self.dims {
                return Err(Error::DimensionMismatch {
                    what: "component frequency dimensions",
                    expected: self.dims,
                    got: c.frequency.len(),
                });
            }
            if c.frequency.iter().any(|f| !(0.0..1.0).contains(f)) {
                return Err(invalid("frequencies must lie in [0, 1)"));
            }
            if !c.amplitude.is_finite() {
                return Err(Error::NonFinite("amplitude"));
            }
        }
        if let Some(s) = self.min_spacing {
            if !spacing_ok(&self.frequencies(), s) {
                return Err(invalid(format!("components closer than {s}")));
            }
        }
        Ok(())
    }
}

fn spacing_ok(freqs: &[Vec<f64>], spacing: f64) -> bool {
    for i in 0..freqs.len() {
        for j in (i + 1)..freqs.len() {
            if freqs[i]
                .iter()
                .zip(&freqs[j])
                .any(|(&a, &b)| torus_distance(a, b) < spacing)
            {
                return false;
            }
        }
    }
    true
}

/// Recipe for random signals: frequencies uniform on `[0, 1)` per dimension,
/// phases uniform on `[0, 2π)`, magnitudes cycled from `magnitudes`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalDraw {
    pub dims: usize,
    pub k: usize,
    pub min_spacing: Option<f64>,
    pub magnitudes: Vec<f64>,
}

impl SignalDraw {
    pub fn new(dims: usize, k: usize) -> Self {
        Self {
            dims,
            k,
            min_spacing: None,
            magnitudes: vec![1.0],
        }
    }

    pub fn with_spacing(mut self, spacing: f64) -> Self {
        self.min_spacing = Some(spacing);
        self
    }

    pub fn with_magnitudes(mut self, m: Vec<f64>) -> Self {
        self.magnitudes = m;
        self
    }

    pub fn draw<R: Rng>(&self, rng: &mut R) -> Result<SignalSpec> {
        if self.magnitudes.is_empty() && self.k > 0 {
            return Err(invalid("at least one magnitude is needed"));
        }
        let mut freqs: Vec<Vec<f64>> = Vec::new();
        let mut attempts = 0;
        loop {
            freqs.clear();
            for _ in 0..self.k {
                freqs.push((0..self.dims).map(|_| rng.random::<f64>()).collect());
            }
            attempts += 1;
            match self.min_spacing {
                Some(s) if !spacing_ok(&freqs, s) => {
                    if attempts >= MAX_SPACING_ATTEMPTS {
                        return Err(Error::SpacingInfeasible {
                            k: self.k,
                            spacing: s,
                            attempts,
                        });
                    }
                }
                _ => break,
            }
        }
        let components = freqs
            .into_iter()
            .enumerate()
            .map(|(i, frequency)| {
                let phase = 2.0 * PI * rng.random::<f64>();
                Component {
                    frequency,
                    amplitude: C64::from_polar(self.magnitudes[i % self.magnitudes.len()], phase),
                }
            })
            .collect();
        Ok(SignalSpec {
            dims: self.dims,
            components,
            min_spacing: self.min_spacing,
        })
    }

    /// Draw from the stream seeded by `seed`.
    pub fn draw_seeded(&self, seed: RngSeed) -> Result<SignalSpec> {
        self.draw(&mut seed.rng())
    }
}

/// Noise-free samples `Σ β_k d̃ₖ⁽¹⁾ ∘ … ∘ d̃ₖ⁽ᴹ⁾`, vectorized with the first
/// dimension fastest.
pub fn generate_signal(spec: &SignalSpec, scheme: &SamplingScheme) -> Result<Vec<C64>> {
    if spec.dims != scheme.dims() {
        return Err(Error::DimensionMismatch {
            what: "signal dimensions",
            expected: scheme.dims(),
            got: spec.dims,
        });
    }
    spec.validate()?;
    let mut y = vec![C64::new(0.0, 0.0); scheme.total_len()];
    for c in &spec.components {
        let parts: Vec<Vec<C64>> = c
            .frequency
            .iter()
            .enumerate()
            .map(|(m, &f)| narrowband_atom(f, scheme.times(m)))
            .collect();
        let refs: Vec<&[C64]> = parts.iter().map(|p| p.as_slice()).collect();
        for (yi, a) in y.iter_mut().zip(kron_vectors(&refs)) {
            *yi += c.amplitude * a;
        }
    }
    Ok(y)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// `10 log₁₀(P_y / σ²)`; `+∞` adds nothing.
    pub snr_db: f64,
}

impl NoiseSpec {
    pub fn new(snr_db: f64) -> Self {
        Self { snr_db }
    }

    /// `σ² = P_y·10^(−SNR/10)` with `P_y = ‖y‖²/N`.
    pub fn variance(&self, y: &[C64]) -> f64 {
        if self.snr_db == f64::INFINITY || y.is_empty() {
            return 0.0;
        }
        let py = y.iter().map(|v| v.norm_sqr()).sum::<f64>() / y.len() as f64;
        py * 10f64.powf(-self.snr_db / 10.0)
    }
}

/// Adds circular complex white Gaussian noise at the requested SNR.
pub fn add_noise<R: Rng>(y: &[C64], noise: NoiseSpec, rng: &mut R) -> Result<Vec<C64>> {
    if y.is_empty() {
        return Err(invalid("cannot add noise to an empty signal"));
    }
    if noise.snr_db.is_nan() || noise.snr_db == f64::NEG_INFINITY {
        return Err(invalid(format!("SNR {} dB is not usable", noise.snr_db)));
    }
    let var = noise.variance(y);
    Ok(add_white_noise(y, var, rng))
}

/// Adds noise of total variance `variance` (each part `variance/2`).
pub fn add_white_noise<R: Rng>(y: &[C64], variance: f64, rng: &mut R) -> Vec<C64> {
    if variance == 0.0 {
        return y.to_vec();
    }
    let s = (variance / 2.0).sqrt();
    y.iter()
        .map(|v| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            v + C64::new(re, im) * s
        })
        .collect()
}

/// `N` instants drawn uniformly on `[0, N)`, sorted.
pub fn nonuniform_times<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    let mut t: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * n as f64).collect();
    t.sort_by(f64::total_cmp);
    t
}
