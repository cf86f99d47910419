//! Seeded Monte Carlo experiments and their aggregated reports.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cost::{relative_complexity, table1_settings};
use super::metrics::{mse, MetricsConfig};
use super::peaks::{peak_variance_study, PeakStudyConfig};
use super::signal::{add_noise, generate_signal, nonuniform_times, NoiseSpec, SignalDraw};
use crate::dict::{AtomKind, DpssConfig, SamplingScheme, DEFAULT_DPSS_RELATIVE_W};
use crate::error::{invalid, Error, Result};
use crate::numerics::RngSeed;
use crate::zoom::{run_zoom, SolverChoice, StageSpec, ZoomPlan};

pub const EXPERIMENTS: &[&str] = &[
    "fig5",
    "fig6",
    "fig7",
    "fig8_lasso",
    "fig9_spice",
    "fig11_nonuniform",
    "fig10_2d",
    "fig12_modelorder",
    "table1",
    "custom",
];

/// Samples per dimension for the 2-D experiments. The full size would need a
/// narrowband dictionary of 10⁴ × 2401 entries.
pub const DESK_2D_SAMPLES: usize = 20;

/// A named estimator: one zoom plan plus the resolution its errors are
/// judged at.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub plan: ZoomPlan,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CustomExperiment {
    /// Samples per dimension.
    pub sizes: Vec<usize>,
    pub k: usize,
    pub snr_db: Vec<f64>,
    #[serde(default)]
    pub min_spacing: Option<f64>,
    #[serde(default)]
    pub nonuniform: bool,
    pub series: Vec<Series>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub name: String,
    pub trials: Option<usize>,
    pub seed: RngSeed,
    pub snr_db: Option<Vec<f64>>,
    /// Per-stage alphas of the wideband pipelines.
    pub alphas: Option<Vec<f64>>,
    pub narrowband_alpha: Option<f64>,
    pub k: Option<usize>,
    /// Samples per dimension.
    pub n: Option<usize>,
    pub solver: Option<SolverChoice>,
    /// Band counts of the wideband pipeline.
    pub stages: Option<Vec<usize>>,
    /// x-axis values: alphas (fig6), band-to-sample ratios (fig7), model
    /// orders (fig12).
    pub sweep: Option<Vec<f64>>,
    /// Sample counts of the fig7 grid.
    pub sizes: Option<Vec<usize>>,
    pub jobs: Option<usize>,
    pub custom: Option<CustomExperiment>,
}

impl ExperimentConfig {
    pub fn named(name: &str) -> Self {
        Self {
            name: name.to_string(),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportPoint {
    pub series: String,
    pub x: f64,
    pub k: usize,
    pub trials: usize,
    /// Correct model order and every true frequency inside a final cell.
    pub success_rate: f64,
    /// Every true frequency inside a final cell, whatever the model order.
    pub support_recovered: f64,
    pub model_order_correct: f64,
    pub over_estimated: f64,
    pub under_estimated: f64,
    /// Mean over correct-order trials without outliers.
    pub mse: Option<f64>,
    /// Correct-order trials dropped because of an outlier pair.
    pub outliers_removed: usize,
    pub mean_ops: f64,
    /// The quantity plotted for this experiment.
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub series: String,
    pub x: f64,
    pub trial: usize,
    pub seed: u64,
    pub k: usize,
    pub k_hat: usize,
    pub covered: bool,
    /// Toroidal error per true component (norm over dimensions), when
    /// `k_hat == k`.
    pub errors: Vec<f64>,
    pub mse: Option<f64>,
    pub outliers: usize,
    pub ops: u64,
    pub time_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub trials: usize,
    pub seed: RngSeed,
    pub x_name: String,
    pub y_metric: String,
    pub points: Vec<ReportPoint>,
    pub rows: Vec<TrialRow>,
    pub config: ExperimentConfig,
    pub wall_time_s: Option<f64>,
}

impl ExperimentReport {
    /// Copy with every wall-clock field cleared, for bit-level comparisons.
    pub fn without_timing(&self) -> Self {
        let mut r = self.clone();
        r.wall_time_s = None;
        r.rows.iter_mut().for_each(|row| row.time_s = None);
        r
    }

    /// `(x, y, series)` triples of the plotted metric.
    pub fn plot_data(&self) -> Vec<(f64, f64, String)> {
        self.points
            .iter()
            .filter_map(|p| p.value.map(|v| (p.x, v, p.series.clone())))
            .collect()
    }

    pub fn point(&self, series: &str, x: f64) -> Option<&ReportPoint> {
        self.points.iter().find(|p| p.series == series && p.x == x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Metric {
    Support,
    ModelOrder,
    Mse,
}

impl Metric {
    fn name(self) -> &'static str {
        match self {
            Metric::Support => "support_recovered",
            Metric::ModelOrder => "model_order_correct",
            Metric::Mse => "mse",
        }
    }
}

#[derive(Debug, Clone)]
struct SweepPoint {
    x: f64,
    /// Samples per dimension, when different from the sweep default.
    sizes: Option<Vec<usize>>,
    snr_db: f64,
    k: usize,
    /// Replaces every alpha of every series.
    alpha: Option<f64>,
    /// Restricts the point to the series with these indices.
    series: Option<Vec<usize>>,
    tag: Option<String>,
}

impl SweepPoint {
    fn snr(x: f64, k: usize) -> Self {
        Self {
            x,
            sizes: None,
            snr_db: x,
            k,
            alpha: None,
            series: None,
            tag: None,
        }
    }
}

struct Sweep {
    sizes: Vec<usize>,
    nonuniform: bool,
    min_spacing: Option<f64>,
    magnitudes: Vec<f64>,
    x_name: &'static str,
    metric: Metric,
    points: Vec<SweepPoint>,
    series: Vec<Series>,
}

fn series(name: &str, plan: ZoomPlan) -> Series {
    Series {
        name: name.to_string(),
        plan,
    }
}

fn narrowband_plan(p: usize, alpha: f64) -> ZoomPlan {
    ZoomPlan {
        stages: vec![StageSpec::new(p, AtomKind::Narrowband)],
        alphas: vec![alpha],
        ..ZoomPlan::default()
    }
}

fn wideband_plan(bands: &[usize], kind: AtomKind, alphas: Vec<f64>) -> ZoomPlan {
    ZoomPlan {
        stages: bands.iter().map(|&b| StageSpec::new(b, kind)).collect(),
        alphas,
        ..ZoomPlan::default()
    }
}

fn label(prefix: &str, bands: &[usize]) -> String {
    let parts: Vec<String> = bands
        .iter()
        .enumerate()
        .map(|(i, b)| format!("B{}={b}", i + 1))
        .collect();
    format!("{prefix} {}", parts.join(", "))
}

/// Default alphas, chosen by seeded calibration runs.
mod defaults {
    pub const FIG6_SWEEP: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];
    pub const FIG7_ALPHA: f64 = 0.3;
    pub const FIG8_NB_ALPHA: f64 = 0.3;
    pub const FIG8_WB_ALPHAS: [f64; 2] = [0.3, 0.3];
    pub const FIG11_NB_ALPHA: f64 = 0.3;
    pub const FIG11_WB_ALPHAS: [f64; 3] = [0.3, 0.3, 0.3];
    pub const FIG10_NB_ALPHA: f64 = 0.3;
    pub const FIG10_WB_ALPHAS: [f64; 2] = [0.3, 0.3];
    pub const MSE_SNRS: [f64; 4] = [5.0, 10.0, 15.0, 20.0];
}

fn trials_or(cfg: &ExperimentConfig, default: usize) -> usize {
    cfg.trials.unwrap_or(default)
}

fn wb_alphas(cfg: &ExperimentConfig, default: &[f64]) -> Vec<f64> {
    cfg.alphas.clone().unwrap_or_else(|| default.to_vec())
}

fn apply_solver(cfg: &ExperimentConfig, sweep: &mut Sweep) {
    if let Some(s) = cfg.solver {
        sweep.series.iter_mut().for_each(|se| se.plan.solver = s);
    }
}

fn fig6(cfg: &ExperimentConfig) -> Sweep {
    let n = cfg.n.unwrap_or(75);
    let k = cfg.k.unwrap_or(3);
    let snr = cfg
        .snr_db
        .as_ref()
        .and_then(|v| v.first().copied())
        .unwrap_or(10.0);
    let alphas = cfg
        .sweep
        .clone()
        .unwrap_or_else(|| defaults::FIG6_SWEEP.to_vec());
    let wb = cfg.stages.clone().unwrap_or_else(|| vec![75, 25]);
    let mut two = wideband_plan(&wb, AtomKind::WidebandIntegrated, vec![0.5]);
    // refining stages use point atoms at the child centres
    for s in two.stages.iter_mut().skip(1) {
        s.kind = AtomKind::Narrowband;
    }
    let mut sw = Sweep {
        sizes: vec![n],
        nonuniform: false,
        min_spacing: None,
        magnitudes: vec![1.0],
        x_name: "alpha",
        metric: Metric::ModelOrder,
        points: alphas
            .iter()
            .map(|&a| SweepPoint {
                alpha: Some(a),
                x: a,
                ..SweepPoint::snr(snr, k)
            })
            .collect(),
        series: vec![
            series("narrowband P=1000", narrowband_plan(1000, 0.5)),
            series(&format!("narrowband P={n}"), narrowband_plan(n, 0.5)),
            series(
                &label("wideband", &wb[..1]),
                wideband_plan(&wb[..1], AtomKind::WidebandIntegrated, vec![0.5]),
            ),
            series(&label("wideband", &wb), two),
        ],
    };
    apply_solver(cfg, &mut sw);
    sw
}

fn fig7(cfg: &ExperimentConfig) -> Result<Sweep> {
    let k = cfg.k.unwrap_or(3);
    let sizes = cfg.sizes.clone().unwrap_or_else(|| vec![30, 50, 100]);
    let ratios = cfg
        .sweep
        .clone()
        .unwrap_or_else(|| (1..=10).map(|i| i as f64 / 10.0).collect());
    let alpha = cfg
        .alphas
        .as_ref()
        .and_then(|a| a.first().copied())
        .unwrap_or(defaults::FIG7_ALPHA);
    if let Some(n) = cfg.n {
        if !sizes.contains(&n) {
            return Err(invalid("fig7 takes its sample counts from `sizes`"));
        }
    }
    // one series per (N, B) pair; each point only runs its own series
    let mut series_list = Vec::new();
    let mut points = Vec::new();
    for &n in &sizes {
        for &r in &ratios {
            let b = ((r * n as f64).round() as usize).max(2);
            let idx = series_list.len();
            series_list.push(Series {
                name: format!("N={n}"),
                plan: wideband_plan(&[b], AtomKind::WidebandIntegrated, vec![alpha]),
            });
            points.push((n, r, idx));
        }
    }
    // group by N so each N uses its own sampling scheme
    let mut sweeps = Vec::new();
    for &n in &sizes {
        let pts: Vec<SweepPoint> = points
            .iter()
            .filter(|p| p.0 == n)
            .map(|&(_, r, idx)| SweepPoint {
                x: r,
                sizes: Some(vec![n]),
                snr_db: f64::INFINITY,
                k,
                alpha: None,
                series: Some(vec![idx]),
                tag: None,
            })
            .collect();
        sweeps.push((n, pts));
    }
    Ok(Sweep {
        sizes,
        nonuniform: false,
        min_spacing: None,
        magnitudes: vec![1.0],
        x_name: "bands_over_samples",
        metric: Metric::Support,
        points: sweeps.into_iter().flat_map(|(_, p)| p).collect(),
        series: series_list,
    })
}

fn mse_sweep_1d(
    cfg: &ExperimentConfig,
    n: usize,
    nb: usize,
    wb: &[usize],
    nb_alpha: f64,
    wb_alpha: &[f64],
    solver: SolverChoice,
    nonuniform: bool,
) -> Sweep {
    let k = cfg.k.unwrap_or(2);
    let snrs = cfg
        .snr_db
        .clone()
        .unwrap_or_else(|| defaults::MSE_SNRS.to_vec());
    let wb = cfg.stages.clone().unwrap_or_else(|| wb.to_vec());
    let mut nb_plan = narrowband_plan(nb, cfg.narrowband_alpha.unwrap_or(nb_alpha));
    let mut wb_plan = wideband_plan(&wb, AtomKind::WidebandIntegrated, wb_alphas(cfg, wb_alpha));
    nb_plan.solver = solver;
    wb_plan.solver = solver;
    let mut sw = Sweep {
        sizes: vec![n],
        nonuniform,
        min_spacing: None,
        magnitudes: vec![1.0],
        x_name: "snr_db",
        metric: Metric::Mse,
        points: snrs.iter().map(|&s| SweepPoint::snr(s, k)).collect(),
        series: vec![
            series(&format!("narrowband P={nb}"), nb_plan),
            series(&label("wideband", &wb), wb_plan),
        ],
    };
    apply_solver(cfg, &mut sw);
    sw
}

fn two_d_series(cfg: &ExperimentConfig, n: usize) -> Vec<Series> {
    let wb = cfg.stages.clone().unwrap_or_else(|| vec![7, 7]);
    let alphas = wb_alphas(cfg, &defaults::FIG10_WB_ALPHAS);
    let mut dpss = wideband_plan(&wb, AtomKind::WidebandDpss, alphas.clone());
    dpss.dpss = Some(DpssConfig {
        q: n,
        w: DEFAULT_DPSS_RELATIVE_W,
    });
    vec![
        series(
            "narrowband P=49",
            narrowband_plan(49, cfg.narrowband_alpha.unwrap_or(defaults::FIG10_NB_ALPHA)),
        ),
        series(
            &label("integrated", &wb),
            wideband_plan(&wb, AtomKind::WidebandIntegrated, alphas),
        ),
        series(&label("dpss", &wb), dpss),
    ]
}

fn fig10(cfg: &ExperimentConfig) -> Sweep {
    let n = cfg.n.unwrap_or(DESK_2D_SAMPLES);
    let k = cfg.k.unwrap_or(2);
    let snrs = cfg
        .snr_db
        .clone()
        .unwrap_or_else(|| defaults::MSE_SNRS.to_vec());
    let mut sw = Sweep {
        sizes: vec![n, n],
        nonuniform: false,
        min_spacing: None,
        magnitudes: vec![1.0],
        x_name: "snr_db",
        metric: Metric::Mse,
        points: snrs.iter().map(|&s| SweepPoint::snr(s, k)).collect(),
        series: two_d_series(cfg, n),
    };
    apply_solver(cfg, &mut sw);
    sw
}

fn fig12(cfg: &ExperimentConfig) -> Sweep {
    let n = cfg.n.unwrap_or(DESK_2D_SAMPLES);
    let ks: Vec<usize> = cfg
        .sweep
        .as_ref()
        .map(|v| v.iter().map(|&x| x as usize).collect())
        .unwrap_or_else(|| vec![4, 6, 8, 10]);
    let snrs = cfg
        .snr_db
        .clone()
        .unwrap_or_else(|| defaults::MSE_SNRS.to_vec());
    let mut s = two_d_series(cfg, n);
    s.truncate(2);
    let mut points = Vec::new();
    for &k in &ks {
        for &snr in &snrs {
            points.push(SweepPoint {
                tag: Some(format!("K={k}")),
                ..SweepPoint::snr(snr, k)
            });
        }
    }
    let mut sw = Sweep {
        sizes: vec![n, n],
        nonuniform: false,
        min_spacing: None,
        magnitudes: vec![1.0],
        x_name: "snr_db",
        metric: Metric::ModelOrder,
        points,
        series: s,
    };
    apply_solver(cfg, &mut sw);
    sw
}

fn custom(cfg: &ExperimentConfig) -> Result<Sweep> {
    let c = cfg
        .custom
        .as_ref()
        .ok_or_else(|| invalid("the custom experiment needs a `custom` section"))?;
    if c.series.is_empty() || c.sizes.is_empty() {
        return Err(invalid(
            "custom experiment needs sizes and at least one series",
        ));
    }
    if c.nonuniform && c.sizes.len() != 1 {
        return Err(invalid(
            "non-uniform sampling is only supported in one dimension",
        ));
    }
    let mut sw = Sweep {
        sizes: c.sizes.clone(),
        nonuniform: c.nonuniform,
        min_spacing: c.min_spacing,
        magnitudes: vec![1.0],
        x_name: "snr_db",
        metric: Metric::Mse,
        points: c.snr_db.iter().map(|&s| SweepPoint::snr(s, c.k)).collect(),
        series: c.series.clone(),
    };
    apply_solver(cfg, &mut sw);
    Ok(sw)
}

struct SeriesOutcome {
    k_hat: usize,
    covered: bool,
    errors: Vec<f64>,
    mse: Option<f64>,
    outliers: usize,
    ops: u64,
    time_s: f64,
}

fn run_trial(
    sw: &Sweep,
    point: &SweepPoint,
    plans: &[(usize, ZoomPlan)],
    seed: RngSeed,
) -> Result<Vec<SeriesOutcome>> {
    let mut rng = seed.rng();
    let sizes = point.sizes.as_ref().unwrap_or(&sw.sizes);
    let scheme = if sw.nonuniform {
        SamplingScheme::new(vec![nonuniform_times(sizes[0], &mut rng)])?
    } else {
        SamplingScheme::uniform_grid(sizes)
    };
    let draw = SignalDraw {
        dims: sizes.len(),
        k: point.k,
        min_spacing: sw.min_spacing.or_else(|| {
            // the fig7 protocol spaces components by 2/N
            (sw.metric == Metric::Support).then(|| 2.0 / sizes[0] as f64)
        }),
        magnitudes: sw.magnitudes.clone(),
    };
    let spec = draw.draw(&mut rng)?;
    let clean = generate_signal(&spec, &scheme)?;
    let y = add_noise(&clean, NoiseSpec::new(point.snr_db), &mut rng)?;
    let truth = spec.frequencies();

    plans
        .iter()
        .map(|(_, plan)| {
            let start = Instant::now();
            let r = run_zoom(&y, &scheme, plan)?;
            let time_s = start.elapsed().as_secs_f64();
            let covered = truth.iter().all(|f| r.covers(f));
            let (errors, m, outliers) = if r.model_order == point.k && point.k > 0 {
                let o = mse(&truth, &r.frequencies, &MetricsConfig::new(r.resolution))?;
                let errs = o
                    .errors
                    .iter()
                    .map(|e| e.iter().map(|d| d * d).sum::<f64>().sqrt())
                    .collect();
                (errs, o.mse, o.outliers)
            } else {
                (Vec::new(), None, 0)
            };
            Ok(SeriesOutcome {
                k_hat: r.model_order,
                covered,
                errors,
                mse: m,
                outliers,
                ops: r.op_count,
                time_s,
            })
        })
        .collect()
}

fn plans_for(sw: &Sweep, point: &SweepPoint) -> Vec<(usize, ZoomPlan)> {
    sw.series
        .iter()
        .enumerate()
        .filter(|(i, _)| point.series.as_ref().is_none_or(|s| s.contains(i)))
        .map(|(i, s)| {
            let mut plan = s.plan.clone();
            if let Some(a) = point.alpha {
                plan.alphas = vec![a];
            }
            (i, plan)
        })
        .collect()
}

fn run_sweep(
    name: &str,
    sw: &Sweep,
    trials: usize,
    cfg: &ExperimentConfig,
) -> Result<ExperimentReport> {
    let start = Instant::now();
    for s in &sw.series {
        s.plan.validate()?;
    }
    let jobs: Vec<(usize, usize)> = (0..sw.points.len())
        .flat_map(|p| (0..trials).map(move |t| (p, t)))
        .collect();
    let outcomes: Vec<Vec<SeriesOutcome>> = jobs
        .par_iter()
        .map(|&(p, t)| {
            let point = &sw.points[p];
            let plans = plans_for(sw, point);
            run_trial(
                sw,
                point,
                &plans,
                cfg.seed.derive(p as u64).derive(t as u64),
            )
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(outcomes.len());
    let mut points = Vec::new();
    for (p, point) in sw.points.iter().enumerate() {
        let plans = plans_for(sw, point);
        for (slot, (si, _)) in plans.iter().enumerate() {
            let mut name_s = sw.series[*si].name.clone();
            if let Some(tag) = &point.tag {
                name_s = format!("{name_s} {tag}");
            }
            let mut agg = Agg::default();
            for t in 0..trials {
                let o = &outcomes[p * trials + t][slot];
                agg.add(o, point.k);
                rows.push(TrialRow {
                    series: name_s.clone(),
                    x: point.x,
                    trial: t,
                    seed: cfg.seed.derive(p as u64).derive(t as u64).0,
                    k: point.k,
                    k_hat: o.k_hat,
                    covered: o.covered,
                    errors: o.errors.clone(),
                    mse: o.mse,
                    outliers: o.outliers,
                    ops: o.ops,
                    time_s: Some(o.time_s),
                });
            }
            points.push(agg.finish(name_s, point, trials, sw.metric));
        }
    }
    Ok(ExperimentReport {
        name: name.to_string(),
        trials,
        seed: cfg.seed,
        x_name: sw.x_name.to_string(),
        y_metric: sw.metric.name().to_string(),
        points,
        rows,
        config: cfg.clone(),
        wall_time_s: Some(start.elapsed().as_secs_f64()),
    })
}

#[derive(Default)]
struct Agg {
    n: usize,
    success: usize,
    covered: usize,
    correct: usize,
    over: usize,
    under: usize,
    mse_sum: f64,
    mse_count: usize,
    outliers_removed: usize,
    ops: f64,
}

impl Agg {
    fn add(&mut self, o: &SeriesOutcome, k: usize) {
        self.n += 1;
        self.ops += o.ops as f64;
        if o.covered {
            self.covered += 1;
        }
        match o.k_hat.cmp(&k) {
            std::cmp::Ordering::Equal => {
                self.correct += 1;
                if o.covered {
                    self.success += 1;
                }
                if o.outliers > 0 {
                    self.outliers_removed += 1;
                } else if let Some(m) = o.mse {
                    self.mse_sum += m;
                    self.mse_count += 1;
                }
            }
            std::cmp::Ordering::Greater => self.over += 1,
            std::cmp::Ordering::Less => self.under += 1,
        }
    }

    fn finish(
        self,
        series: String,
        point: &SweepPoint,
        trials: usize,
        metric: Metric,
    ) -> ReportPoint {
        let frac = |c: usize| {
            if self.n == 0 {
                0.0
            } else {
                c as f64 / self.n as f64
            }
        };
        let mse = (self.mse_count > 0).then(|| self.mse_sum / self.mse_count as f64);
        let value = match metric {
            Metric::Support => Some(frac(self.covered)),
            Metric::ModelOrder => Some(frac(self.correct)),
            Metric::Mse => mse,
        };
        ReportPoint {
            series,
            x: point.x,
            k: point.k,
            trials,
            success_rate: frac(self.success),
            support_recovered: frac(self.covered),
            model_order_correct: frac(self.correct),
            over_estimated: frac(self.over),
            under_estimated: frac(self.under),
            mse,
            outliers_removed: self.outliers_removed,
            mean_ops: if self.n == 0 {
                0.0
            } else {
                self.ops / self.n as f64
            },
            value,
        }
    }
}

fn fig5(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    let mut study = PeakStudyConfig {
        trials: trials_or(cfg, 1000),
        ..PeakStudyConfig::default()
    };
    if let Some(s) = &cfg.snr_db {
        study.snr_db = s.clone();
    }
    if let Some(n) = cfg.n {
        study.n = n;
    }
    if let Some(b) = cfg.stages.as_ref().and_then(|s| s.first()) {
        study.bands = *b;
    }
    let res = peak_variance_study(&study, cfg.seed)?;
    let mut points = Vec::new();
    for p in &res {
        for (name, std) in [
            ("narrowband", p.narrowband_std),
            ("wideband", p.wideband_std),
        ] {
            points.push(ReportPoint {
                series: name.to_string(),
                x: p.snr_db,
                k: 2,
                trials: study.trials,
                success_rate: 0.0,
                support_recovered: 0.0,
                model_order_correct: 0.0,
                over_estimated: 0.0,
                under_estimated: 0.0,
                mse: None,
                outliers_removed: 0,
                mean_ops: 0.0,
                value: Some(std),
            });
        }
    }
    Ok(ExperimentReport {
        name: "fig5".into(),
        trials: study.trials,
        seed: cfg.seed,
        x_name: "snr_db".into(),
        y_metric: "smallest_peak_std".into(),
        points,
        rows: Vec::new(),
        config: cfg.clone(),
        wall_time_s: Some(start.elapsed().as_secs_f64()),
    })
}

fn table1(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let mut points = Vec::new();
    for (i, s) in table1_settings().iter().enumerate() {
        points.push(ReportPoint {
            series: label("wideband", &s.bands),
            x: (i + 1) as f64,
            k: s.k,
            trials: 0,
            success_rate: 0.0,
            support_recovered: 0.0,
            model_order_correct: 0.0,
            over_estimated: 0.0,
            under_estimated: 0.0,
            mse: None,
            outliers_removed: 0,
            mean_ops: 0.0,
            value: Some(relative_complexity(s)?),
        });
    }
    Ok(ExperimentReport {
        name: "table1".into(),
        trials: 0,
        seed: cfg.seed,
        x_name: "row".into(),
        y_metric: "relative_complexity".into(),
        points,
        rows: Vec::new(),
        config: cfg.clone(),
        wall_time_s: Some(0.0),
    })
}

fn dispatch(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let name = cfg.name.as_str();
    match name {
        "fig5" => fig5(cfg),
        "table1" => table1(cfg),
        "fig6" => run_sweep(name, &fig6(cfg), trials_or(cfg, 1000), cfg),
        "fig7" => run_sweep(name, &fig7(cfg)?, trials_or(cfg, 100), cfg),
        "fig8_lasso" => {
            let n = cfg.n.unwrap_or(300);
            let sw = mse_sweep_1d(
                cfg,
                n,
                100,
                &[20, 5],
                defaults::FIG8_NB_ALPHA,
                &defaults::FIG8_WB_ALPHAS,
                SolverChoice::Lasso,
                false,
            );
            run_sweep(name, &sw, trials_or(cfg, 1000), cfg)
        }
        "fig9_spice" => {
            let n = cfg.n.unwrap_or(300);
            let sw = mse_sweep_1d(
                cfg,
                n,
                100,
                &[20, 5],
                defaults::FIG8_NB_ALPHA,
                &defaults::FIG8_WB_ALPHAS,
                SolverChoice::Spice,
                false,
            );
            run_sweep(name, &sw, trials_or(cfg, 1000), cfg)
        }
        "fig11_nonuniform" => {
            let n = cfg.n.unwrap_or(400);
            let sw = mse_sweep_1d(
                cfg,
                n,
                200,
                &[10, 10, 5],
                defaults::FIG11_NB_ALPHA,
                &defaults::FIG11_WB_ALPHAS,
                SolverChoice::Lasso,
                true,
            );
            run_sweep(name, &sw, trials_or(cfg, 1000), cfg)
        }
        "fig10_2d" => run_sweep(name, &fig10(cfg), trials_or(cfg, 100), cfg),
        "fig12_modelorder" => run_sweep(name, &fig12(cfg), trials_or(cfg, 100), cfg),
        "custom" => run_sweep(name, &custom(cfg)?, trials_or(cfg, 100), cfg),
        other => Err(Error::UnknownExperiment(other.to_string())),
    }
}

/// Runs a built-in experiment, in a dedicated pool when `jobs` is set.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    if !EXPERIMENTS.contains(&cfg.name.as_str()) {
        return Err(Error::UnknownExperiment(cfg.name.clone()));
    }
    match cfg.jobs {
        Some(j) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(j.max(1))
                .build()
                .map_err(|e| invalid(format!("thread pool: {e}")))?;
            pool.install(|| dispatch(cfg))
        }
        None => dispatch(cfg),
    }
}
