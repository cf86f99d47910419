//! Multi-stage band zooming: solve over a coarse wideband partition, keep the
//! active bands, split them and solve again.

mod cluster;
mod ratio;

use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use cluster::{cluster_cells, cluster_estimate};
pub use ratio::{
    band_ratio, band_ratio_checked, feasible_band_range, recommend_bands, BandRatio,
    BandRatioModel, FIT_BANDS, FIT_SAMPLES, THRESHOLD_MULTI_STAGE, THRESHOLD_SINGLE_STAGE,
};

use crate::dict::{
    build_dictionary_with_limit, narrowband_atom, AtomKind, Band, BandGrid, Cell, Dictionary,
    DpssConfig, SamplingScheme,
};
use crate::error::{invalid, Error, Result};
use crate::numerics::{cdot, hpd_solve, kron_vectors, CMatrix, C64, DEFAULT_MAX_ENTRIES};
use crate::sim::admm_cost;
use crate::solve::{
    active_indices, lambda_max, lasso_admm, spice, LassoConfig, SolveResult, SpiceConfig,
    DEFAULT_EPS_ACT,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverChoice {
    Lasso,
    Spice,
}

impl FromStr for SolverChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lasso" | "admm" => Ok(Self::Lasso),
            "spice" => Ok(Self::Spice),
            other => Err(invalid(format!("unknown solver `{other}`"))),
        }
    }
}

/// How one frequency is read off each final cluster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimateRule {
    /// Midpoint of the arc covered by the cluster, per dimension.
    #[default]
    Midpoint,
    /// Centre of the cluster cell with the largest narrowband correlation.
    NarrowbandPeak,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageSpec {
    /// Stage 1: bands over `[0, 1)`. Later stages: children per surviving band.
    /// Applied per dimension.
    pub bands_per_active: usize,
    pub kind: AtomKind,
}

impl StageSpec {
    pub fn new(bands_per_active: usize, kind: AtomKind) -> Self {
        Self {
            bands_per_active,
            kind,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmmOptions {
    pub rho: f64,
    pub max_iters: usize,
    /// Absolute primal/dual tolerance; `None` means `1e-8·√P` per stage.
    pub tol: Option<f64>,
}

impl Default for AdmmOptions {
    fn default() -> Self {
        Self {
            rho: 1.0,
            max_iters: 5000,
            tol: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ZoomPlan {
    pub stages: Vec<StageSpec>,
    pub solver: SolverChoice,
    /// `λ = α_z·λ_max` at stage `z`; the last entry repeats for later stages.
    pub alphas: Vec<f64>,
    pub spice: SpiceConfig,
    pub admm: AdmmOptions,
    pub eps_act: f64,
    /// DPSS taper length and half-bandwidth as a fraction of the band width.
    pub dpss: Option<DpssConfig>,
    pub estimate: EstimateRule,
    pub max_entries: usize,
}

impl Default for ZoomPlan {
    fn default() -> Self {
        Self {
            stages: vec![
                StageSpec::new(20, AtomKind::WidebandIntegrated),
                StageSpec::new(5, AtomKind::WidebandIntegrated),
            ],
            solver: SolverChoice::Lasso,
            alphas: vec![0.3],
            spice: SpiceConfig::default(),
            admm: AdmmOptions::default(),
            eps_act: DEFAULT_EPS_ACT,
            dpss: None,
            estimate: EstimateRule::Midpoint,
            max_entries: DEFAULT_MAX_ENTRIES,
        }
    }
}

impl ZoomPlan {
    /// Plan with the given per-stage band counts, all of one atom kind.
    pub fn with_stages(bands: &[usize], kind: AtomKind) -> Self {
        Self {
            stages: bands.iter().map(|&b| StageSpec::new(b, kind)).collect(),
            ..Self::default()
        }
    }

    pub fn alpha(&self, stage: usize) -> f64 {
        self.alphas[stage.min(self.alphas.len() - 1)]
    }

    pub fn validate(&self) -> Result<()> {
        if self.stages.is_empty() {
            return Err(invalid("a zoom plan needs at least one stage"));
        }
        if let Some(s) = self.stages.iter().find(|s| s.bands_per_active < 2) {
            return Err(invalid(format!(
                "stage band count {} < 2",
                s.bands_per_active
            )));
        }
        if self.solver == SolverChoice::Lasso {
            if self.alphas.is_empty() {
                return Err(invalid("LASSO stages need at least one alpha"));
            }
            if let Some(a) = self.alphas.iter().find(|&&a| !(a > 0.0 && a <= 1.0)) {
                return Err(invalid(format!("alpha {a} outside (0, 1]")));
            }
        }
        if !(self.eps_act >= 0.0 && self.eps_act < 1.0) {
            return Err(invalid(format!("eps_act {} outside [0, 1)", self.eps_act)));
        }
        self.spice.validate()?;
        Ok(())
    }

    /// Final resolution per dimension, `1/∏B_z`.
    pub fn resolution(&self) -> f64 {
        1.0 / self
            .stages
            .iter()
            .map(|s| s.bands_per_active as f64)
            .product::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTrace {
    pub stage: usize,
    pub kind: AtomKind,
    pub columns: usize,
    /// `None` for SPICE.
    pub lambda: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub objective: f64,
    /// `(column, coefficient)` for every active column.
    pub active: Vec<(usize, C64)>,
    pub clusters: usize,
    pub ops: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoomResult {
    /// Active cells after every stage.
    pub surviving_bands: Vec<Vec<Cell>>,
    /// One estimate per cluster, one coordinate per dimension.
    pub frequencies: Vec<Vec<f64>>,
    pub model_order: usize,
    pub amplitudes: Vec<C64>,
    /// Indices into the final surviving cells, one group per cluster.
    pub clusters: Vec<Vec<usize>>,
    pub stage_traces: Vec<StageTrace>,
    pub op_count: u64,
    pub resolution: f64,
}

impl ZoomResult {
    pub fn final_cells(&self) -> &[Cell] {
        self.surviving_bands
            .last()
            .map(|v| v.as_slice())
            .unwrap_or(&[])
    }

    /// Whether the point lies in one of the final surviving cells.
    pub fn covers(&self, f: &[f64]) -> bool {
        self.final_cells()
            .iter()
            .any(|cell| cell.iter().zip(f).all(|(b, &x)| b.contains(x)))
    }
}

/// Columns whose magnitude exceeds `eps_act` times the largest one.
pub fn select_active_bands(
    result: &SolveResult,
    cells: &[Cell],
    eps_act: f64,
) -> Result<Vec<usize>> {
    if result.coefficients.len() != cells.len() {
        return Err(Error::DimensionMismatch {
            what: "coefficients vs bands",
            expected: cells.len(),
            got: result.coefficients.len(),
        });
    }
    Ok(active_indices(&result.coefficients, eps_act))
}

/// Splits every band into `count` children and merges the result into one
/// grid. Shared parent edges stay bit-identical.
pub fn split_bands(bands: &[Band], count: usize) -> Result<BandGrid> {
    if count < 2 {
        return Err(invalid(format!("split count {count} < 2")));
    }
    let mut children: Vec<Band> = bands.iter().flat_map(|b| b.split(count)).collect();
    children.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    children.dedup_by(|a, b| a.lo == b.lo && a.hi == b.hi);
    BandGrid::from_bands(children)
}

/// Children of an M-D cell: the Cartesian product of per-axis splits, first
/// dimension fastest.
fn split_cell(cell: &Cell, count: usize) -> Vec<Cell> {
    let parts: Vec<Vec<Band>> = cell.iter().map(|b| b.split(count)).collect();
    let total: usize = parts.iter().map(Vec::len).product();
    let mut out = Vec::with_capacity(total);
    let mut idx = vec![0usize; parts.len()];
    for _ in 0..total {
        out.push(idx.iter().zip(&parts).map(|(&i, p)| p[i]).collect());
        for (m, p) in parts.iter().enumerate() {
            idx[m] += 1;
            if idx[m] < p.len() {
                break;
            }
            idx[m] = 0;
        }
    }
    out
}

fn solve_stage(
    plan: &ZoomPlan,
    stage: usize,
    dict: &Dictionary,
    y: &[C64],
) -> Result<(SolveResult, Option<f64>)> {
    match plan.solver {
        SolverChoice::Lasso => {
            let lmax = lambda_max(dict, y)?;
            let lambda = plan.alpha(stage) * lmax;
            let mut cfg = LassoConfig::new(lambda, dict.len());
            cfg.rho = plan.admm.rho;
            cfg.max_iters = plan.admm.max_iters;
            if let Some(t) = plan.admm.tol {
                cfg.tol_primal = t;
                cfg.tol_dual = t;
            }
            cfg.eps_act = plan.eps_act;
            Ok((lasso_admm(dict, y, &cfg)?, Some(lambda)))
        }
        SolverChoice::Spice => {
            let cfg = SpiceConfig {
                eps_act: plan.eps_act,
                ..plan.spice
            };
            Ok((spice(dict, y, &cfg)?, None))
        }
    }
}

pub fn run_zoom(y: &[C64], scheme: &SamplingScheme, plan: &ZoomPlan) -> Result<ZoomResult> {
    plan.validate()?;
    let n = scheme.total_len();
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
    let dims = scheme.dims();
    let mut surviving: Vec<Vec<Cell>> = Vec::new();
    let mut traces = Vec::new();
    let mut op_count: u64 = 0;
    let mut cells: Vec<Cell> = Vec::new();

    for (z, spec) in plan.stages.iter().enumerate() {
        let dict = if z == 0 {
            let grid = BandGrid::uniform(spec.bands_per_active)?;
            let grids = vec![grid; dims];
            build_dictionary_with_limit(scheme, &grids, spec.kind, plan.dpss, plan.max_entries)?
        } else {
            let next: Vec<Cell> = cells
                .iter()
                .flat_map(|c| split_cell(c, spec.bands_per_active))
                .collect();
            Dictionary::from_cells(scheme, next, spec.kind, plan.dpss, plan.max_entries)?
        };
        let ops = admm_cost(n as u64, dict.len() as u64);
        op_count = op_count.saturating_add(ops);
        let (result, lambda) = solve_stage(plan, z, &dict, y)?;
        let active = select_active_bands(&result, dict.cells(), plan.eps_act)?;
        cells = active.iter().map(|&j| dict.cell(j).clone()).collect();
        let groups = cluster_cells(&cells);
        traces.push(StageTrace {
            stage: z + 1,
            kind: spec.kind,
            columns: dict.len(),
            lambda,
            iterations: result.iterations,
            converged: result.converged,
            objective: result.objective,
            active: active
                .iter()
                .map(|&j| (j, result.coefficients[j]))
                .collect(),
            clusters: groups.len(),
            ops,
        });
        surviving.push(cells.clone());
        if cells.is_empty() {
            break;
        }
    }

    let clusters = cluster_cells(&cells);
    let frequencies: Vec<Vec<f64>> = match plan.estimate {
        EstimateRule::Midpoint => clusters
            .iter()
            .map(|g| cluster_estimate(&cells, g))
            .collect(),
        EstimateRule::NarrowbandPeak => clusters
            .iter()
            .map(|g| peak_estimate(scheme, y, &cells, g))
            .collect(),
    };
    let amplitudes = if frequencies.is_empty() {
        Vec::new()
    } else {
        amplitudes_at(scheme, y, &frequencies)?
    };
    Ok(ZoomResult {
        surviving_bands: surviving,
        model_order: frequencies.len(),
        frequencies,
        amplitudes,
        clusters,
        stage_traces: traces,
        op_count,
        resolution: plan.resolution(),
    })
}

fn narrowband_column(scheme: &SamplingScheme, f: &[f64]) -> Vec<C64> {
    let parts: Vec<Vec<C64>> = f
        .iter()
        .enumerate()
        .map(|(m, &fm)| narrowband_atom(fm, scheme.times(m)))
        .collect();
    let refs: Vec<&[C64]> = parts.iter().map(|p| p.as_slice()).collect();
    kron_vectors(&refs)
}

fn peak_estimate(scheme: &SamplingScheme, y: &[C64], cells: &[Cell], group: &[usize]) -> Vec<f64> {
    let score = |j: usize| -> f64 {
        let f: Vec<f64> = cells[j].iter().map(Band::center).collect();
        cdot(&narrowband_column(scheme, &f), y).norm()
    };
    let best = group
        .iter()
        .copied()
        .max_by(|&a, &b| score(a).total_cmp(&score(b)))
        .expect("clusters are non-empty");
    cells[best].iter().map(Band::center).collect()
}

/// Least-squares amplitudes of narrowband atoms at the estimates. Falls back
/// to per-component matched filtering when the estimates are too close for
/// a stable joint fit.
pub fn amplitudes_at(scheme: &SamplingScheme, y: &[C64], freqs: &[Vec<f64>]) -> Result<Vec<C64>> {
    let cols: Vec<Vec<C64>> = freqs.iter().map(|f| narrowband_column(scheme, f)).collect();
    let a = CMatrix::from_columns(y.len(), &cols)?;
    let gram = a.gram();
    let rhs = a.hermitian_product(y)?;
    match hpd_solve(&gram, &rhs) {
        Ok(x) => Ok(x),
        Err(Error::NotPositiveDefinite { .. }) | Err(Error::NonFinite(_)) => Ok(rhs
            .iter()
            .enumerate()
            .map(|(k, r)| r / gram.get(k, k).re)
            .collect()),
        Err(e) => Err(e),
    }
}
