mod config;
mod io;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Result};
use bandsparse::dict::{
    build_dictionary, inner_product_scan, narrowband_atom, AtomKind, BandGrid, Dictionary,
    DpssConfig, SamplingScheme, DEFAULT_DPSS_RELATIVE_W,
};
use bandsparse::sim::{
    admm_cost, relative_complexity, run_experiment, table1_settings, zoom_budget, ExperimentConfig,
    ExperimentReport,
};
use bandsparse::zoom::{
    band_ratio_checked, feasible_band_range, recommend_bands, run_zoom, EstimateRule, SolverChoice,
    StageSpec, ZoomPlan, ZoomResult,
};
use bandsparse::C64;
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use config::{
    parse_list, resolve_seed, CostSettings, Fixture, Format, RunConfig, ScanKind, ScanSettings,
};
use io::{csv_bytes, read_series, write_atomic, write_json, OutDir, Series};

/// Comma-separated list taken as one flag value; the alias keeps clap from
/// treating it as a repeated flag.
type List<T> = Vec<T>;

#[derive(Parser)]
#[command(
    name = "bandsparse",
    version,
    about = "Sparse line-spectral estimation with wideband dictionaries"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Zoom estimate on a CSV series.
    Estimate(EstimateArgs),
    /// Run a built-in Monte Carlo experiment or a custom one from --config.
    Experiment(ExperimentArgs),
    /// Inner-product scan of a series against narrowband and wideband dictionaries.
    Scan(ScanArgs),
    /// Cost model, band-ratio rule and band recommendations.
    Costs(CostsArgs),
}

#[derive(Args)]
struct Common {
    /// Output directory; created if missing.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// JSON run configuration; flags take precedence over it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Worker threads for trial-level parallelism.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct PlanArgs {
    #[arg(long, value_parser = parse_solver)]
    solver: Option<SolverChoice>,
    /// Band counts per stage, e.g. "40,50".
    #[arg(long, value_parser = parse_list::<usize>)]
    stages: Option<List<usize>>,
    /// Regularization factor per stage; repeat for later stages.
    #[arg(long = "alpha")]
    alpha: Vec<f64>,
    /// Atom kind used by every stage.
    #[arg(long, value_parser = parse_kind)]
    kind: Option<AtomKind>,
    /// Read one frequency per cluster at the strongest narrowband cell instead of the midpoint.
    #[arg(long)]
    peak_estimate: bool,
}

#[derive(Args)]
struct EstimateArgs {
    /// CSV with columns time,re,im (or one index column per dimension plus re,im).
    #[arg(long)]
    input: Option<PathBuf>,
    #[command(flatten)]
    plan: PlanArgs,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ExperimentArgs {
    /// fig5, fig6, fig7, fig8_lasso, fig9_spice, fig11_nonuniform, fig10_2d, fig12_modelorder, table1 or custom.
    name: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    /// SNR values in dB, e.g. "5,10,15,20"; repeatable.
    #[arg(long = "snr-db", value_parser = parse_list::<f64>, allow_hyphen_values = true)]
    snr_db: Vec<List<f64>>,
    #[arg(long, value_parser = parse_solver)]
    solver: Option<SolverChoice>,
    #[arg(long, value_parser = parse_list::<usize>)]
    stages: Option<List<usize>>,
    #[arg(long = "alpha")]
    alpha: Vec<f64>,
    #[arg(long)]
    narrowband_alpha: Option<f64>,
    /// Number of components.
    #[arg(long)]
    k: Option<usize>,
    /// Samples per dimension.
    #[arg(long)]
    n: Option<usize>,
    /// Sample counts of the band-ratio grid.
    #[arg(long, value_parser = parse_list::<usize>)]
    sizes: Option<List<usize>>,
    /// x-axis values of the sweep.
    #[arg(long, value_parser = parse_list::<f64>)]
    sweep: Option<List<f64>>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long)]
    input: Option<PathBuf>,
    /// Built-in two-tone series with one component between grid points.
    #[arg(long, value_enum)]
    fixture: Option<Fixture>,
    /// Grid size per dimension.
    #[arg(long)]
    bands: Option<usize>,
    #[arg(long, value_enum)]
    kind: Option<ScanKind>,
    /// Report raw |<atom, y>| instead of values scaled to a maximum of 1.
    #[arg(long)]
    raw: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct CostsArgs {
    /// Band-gain ratio for --B and --N.
    #[arg(long)]
    ratio: bool,
    /// Zoom budget for --P, --N, --K, --eta, --stages.
    #[arg(long)]
    budget: bool,
    /// Recommended band count for --N and --stages.
    #[arg(long)]
    recommend: bool,
    /// x-step cost for --N and --P.
    #[arg(long)]
    admm: bool,
    /// Relative complexity of the three reference pipelines.
    #[arg(long)]
    table1: bool,
    #[arg(long = "B")]
    b: Option<usize>,
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long = "P")]
    p: Option<usize>,
    #[arg(long = "K")]
    k: Option<usize>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    stages: Option<usize>,
    #[command(flatten)]
    common: Common,
}

fn parse_solver(s: &str) -> std::result::Result<SolverChoice, String> {
    s.parse().map_err(|e: bandsparse::Error| e.to_string())
}

fn parse_kind(s: &str) -> std::result::Result<AtomKind, String> {
    match s.to_ascii_lowercase().as_str() {
        "narrowband" | "nb" => Ok(AtomKind::Narrowband),
        "wideband" | "integrated" | "wb" => Ok(AtomKind::WidebandIntegrated),
        "dpss" => Ok(AtomKind::WidebandDpss),
        other => Err(format!(
            "unknown atom kind `{other}` (narrowband, wideband, dpss)"
        )),
    }
}

/// Marks an error as a usage or input problem (exit code 2).
#[derive(Debug)]
struct Usage;

impl fmt::Display for Usage {
    fn fmt(&self, _f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // marker only; never shown
        Ok(())
    }
}

impl std::error::Error for Usage {}

trait UsageExt<T> {
    fn usage(self) -> Result<T>;
}

impl<T, E: Into<anyhow::Error>> UsageExt<T> for std::result::Result<T, E> {
    fn usage(self) -> Result<T> {
        self.map_err(|e| e.into().context(Usage))
    }
}

fn usage_err(msg: impl fmt::Display) -> anyhow::Error {
    anyhow!("{msg}").context(Usage)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<Usage>().is_some() {
        return 2;
    }
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<bandsparse::Error>() {
            use bandsparse::Error::*;
            return match e {
                NotPositiveDefinite { .. } | NonFinite(_) | RankDeficient => 1,
                _ => 2,
            };
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Estimate(a) => cmd_estimate(a),
        Command::Experiment(a) => cmd_experiment(a),
        Command::Scan(a) => cmd_scan(a),
        Command::Costs(a) => cmd_costs(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let chain: Vec<String> = e
                .chain()
                .map(|c| c.to_string())
                .filter(|s| !s.is_empty())
                .collect();
            eprintln!("error: {}", chain.join(": "));
            ExitCode::from(exit_code(&e))
        }
    }
}

/// Config file (if any) after checking it targets `command`.
fn load_config(common: &Common, command: &str) -> Result<RunConfig> {
    let Some(path) = &common.config else {
        return Ok(RunConfig::default());
    };
    let cfg = RunConfig::load(path).usage()?;
    if let Some(c) = &cfg.command {
        if c != command {
            return Err(usage_err(format!(
                "config file is for `{c}`, not `{command}`"
            )));
        }
    }
    Ok(cfg)
}

struct Resolved {
    out: Option<OutDir>,
    seed: u64,
    format: Format,
    jobs: Option<usize>,
}

fn resolve_common(common: &Common, file: &RunConfig) -> Result<Resolved> {
    let out = match common.out.clone().or_else(|| file.out.clone()) {
        Some(p) => Some(OutDir::create(&p).usage()?),
        None => None,
    };
    Ok(Resolved {
        out,
        seed: resolve_seed(common.seed, file.seed).usage()?,
        format: common.format.or(file.format).unwrap_or_default(),
        jobs: common.jobs.or(file.jobs),
    })
}

fn effective(command: &str, r: &Resolved, mut base: RunConfig) -> RunConfig {
    base.command = Some(command.to_string());
    base.out = r.out.as_ref().map(|o| o.0.clone());
    base.seed = Some(r.seed);
    base.format = Some(r.format);
    base.jobs = r.jobs;
    base
}

fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        Some(j) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(j.max(1))
                .build()?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

fn fmt_f(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

// ---------------------------------------------------------------- estimate

fn build_plan(args: &PlanArgs, file: Option<ZoomPlan>) -> Result<ZoomPlan> {
    let mut plan =
        file.unwrap_or_else(|| ZoomPlan::with_stages(&[40, 50], AtomKind::WidebandIntegrated));
    if let Some(bands) = &args.stages {
        let kind = args
            .kind
            .or(plan.stages.first().map(|s| s.kind))
            .unwrap_or(AtomKind::WidebandIntegrated);
        plan.stages = bands.iter().map(|&b| StageSpec::new(b, kind)).collect();
    } else if let Some(kind) = args.kind {
        plan.stages.iter_mut().for_each(|s| s.kind = kind);
    }
    if let Some(s) = args.solver {
        plan.solver = s;
    }
    if !args.alpha.is_empty() {
        plan.alphas = args.alpha.clone();
    }
    if args.peak_estimate {
        plan.estimate = EstimateRule::NarrowbandPeak;
    }
    plan.validate().usage()?;
    Ok(plan)
}

fn with_dpss_defaults(mut plan: ZoomPlan, scheme: &SamplingScheme) -> Result<ZoomPlan> {
    if plan.dpss.is_none() && plan.stages.iter().any(|s| s.kind == AtomKind::WidebandDpss) {
        let q = scheme.sizes().into_iter().max().unwrap_or(2).max(2);
        plan.dpss = Some(DpssConfig::new(q, DEFAULT_DPSS_RELATIVE_W).usage()?);
    }
    Ok(plan)
}

fn estimates_table(r: &ZoomResult, dims: usize) -> Result<Vec<u8>> {
    let mut header: Vec<String> = (1..=dims).map(|m| format!("f{m}")).collect();
    header.extend(["amp_re", "amp_im", "amp_abs"].map(String::from));
    let h: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    let rows = r.frequencies.iter().enumerate().map(|(i, f)| {
        let a = r
            .amplitudes
            .get(i)
            .copied()
            .unwrap_or(C64::new(f64::NAN, f64::NAN));
        let mut row: Vec<String> = f.iter().map(|&v| fmt_f(v)).collect();
        row.extend([fmt_f(a.re), fmt_f(a.im), fmt_f(a.norm())]);
        row
    });
    csv_bytes(&h, rows)
}

fn cmd_estimate(args: EstimateArgs) -> Result<()> {
    let file = load_config(&args.common, "estimate")?;
    let r = resolve_common(&args.common, &file)?;
    let input = args
        .input
        .clone()
        .or_else(|| file.input.clone())
        .ok_or_else(|| usage_err("estimate needs --input"))?;
    let series = read_series(&input).usage()?;
    let plan = with_dpss_defaults(build_plan(&args.plan, file.plan.clone())?, &series.scheme)?;
    let result = with_pool(r.jobs, || run_zoom(&series.y, &series.scheme, &plan))??;

    let table = estimates_table(&result, series.scheme.dims())?;
    match r.format {
        Format::Csv => {
            println!("model_order,{}", result.model_order);
            println!("op_count,{}", result.op_count);
            print!("{}", String::from_utf8_lossy(&table));
        }
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(&json!({
                "model_order": result.model_order,
                "frequencies": result.frequencies,
                "amplitudes": result.amplitudes.iter().map(|a| [a.re, a.im]).collect::<Vec<_>>(),
                "op_count": result.op_count,
            }))?
        ),
    }
    if let Some(out) = &r.out {
        write_json(&out.file("result.json"), &result)?;
        write_atomic(&out.file("estimates.csv"), &table)?;
        let eff = RunConfig {
            input: Some(input),
            plan: Some(plan),
            ..effective("estimate", &r, file)
        };
        write_json(&out.file("effective_config.json"), &eff)?;
    }
    Ok(())
}

// -------------------------------------------------------------- experiment

fn build_experiment(
    args: &ExperimentArgs,
    file: &RunConfig,
    seed: u64,
    jobs: Option<usize>,
) -> Result<ExperimentConfig> {
    let mut cfg = file.experiment.clone().unwrap_or_default();
    if let Some(n) = &args.name {
        cfg.name = n.clone();
    }
    if cfg.name.is_empty() {
        return Err(usage_err(
            "experiment needs a name (positional or in the config file)",
        ));
    }
    cfg.seed = bandsparse::RngSeed(seed);
    cfg.jobs = jobs;
    if args.trials.is_some() {
        cfg.trials = args.trials;
    }
    if !args.snr_db.is_empty() {
        cfg.snr_db = Some(args.snr_db.concat());
    }
    if args.solver.is_some() {
        cfg.solver = args.solver;
    }
    if args.stages.is_some() {
        cfg.stages = args.stages.clone();
    }
    if !args.alpha.is_empty() {
        cfg.alphas = Some(args.alpha.clone());
    }
    if args.narrowband_alpha.is_some() {
        cfg.narrowband_alpha = args.narrowband_alpha;
    }
    for (flag, slot) in [(args.k, &mut cfg.k), (args.n, &mut cfg.n)] {
        if flag.is_some() {
            *slot = flag;
        }
    }
    if args.sizes.is_some() {
        cfg.sizes = args.sizes.clone();
    }
    if args.sweep.is_some() {
        cfg.sweep = args.sweep.clone();
    }
    if cfg.trials == Some(0) {
        return Err(usage_err("--trials must be at least 1"));
    }
    Ok(cfg)
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f).unwrap_or_default()
}

fn points_csv(r: &ExperimentReport) -> Result<Vec<u8>> {
    csv_bytes(
        &[
            "series",
            "x",
            "k",
            "trials",
            "success_rate",
            "support_recovered",
            "model_order_correct",
            "over_estimated",
            "under_estimated",
            "mse",
            "outliers_removed",
            "mean_ops",
            "value",
        ],
        r.points.iter().map(|p| {
            vec![
                p.series.clone(),
                fmt_f(p.x),
                p.k.to_string(),
                p.trials.to_string(),
                fmt_f(p.success_rate),
                fmt_f(p.support_recovered),
                fmt_f(p.model_order_correct),
                fmt_f(p.over_estimated),
                fmt_f(p.under_estimated),
                opt(p.mse),
                p.outliers_removed.to_string(),
                fmt_f(p.mean_ops),
                opt(p.value),
            ]
        }),
    )
}

fn trials_csv(r: &ExperimentReport) -> Result<Vec<u8>> {
    csv_bytes(
        &[
            "series", "x", "trial", "seed", "k", "k_hat", "covered", "errors", "mse", "outliers",
            "ops", "time_s",
        ],
        r.rows.iter().map(|t| {
            vec![
                t.series.clone(),
                fmt_f(t.x),
                t.trial.to_string(),
                t.seed.to_string(),
                t.k.to_string(),
                t.k_hat.to_string(),
                t.covered.to_string(),
                t.errors
                    .iter()
                    .map(|e| fmt_f(*e))
                    .collect::<Vec<_>>()
                    .join(";"),
                opt(t.mse),
                t.outliers.to_string(),
                t.ops.to_string(),
                opt(t.time_s),
            ]
        }),
    )
}

fn plot_csv(r: &ExperimentReport) -> Result<Vec<u8>> {
    csv_bytes(
        &["x", "y", "series"],
        r.plot_data()
            .into_iter()
            .map(|(x, y, s)| vec![fmt_f(x), fmt_f(y), s]),
    )
}

/// `(N, B/N, rate)` grid for the band-ratio experiment.
fn grid_csv(r: &ExperimentReport) -> Result<Vec<u8>> {
    csv_bytes(
        &[
            "n",
            "bands_over_samples",
            "support_recovered",
            "model_order_correct",
        ],
        r.points.iter().map(|p| {
            vec![
                p.series.trim_start_matches("N=").to_string(),
                fmt_f(p.x),
                fmt_f(p.support_recovered),
                fmt_f(p.model_order_correct),
            ]
        }),
    )
}

fn cmd_experiment(args: ExperimentArgs) -> Result<()> {
    let file = load_config(&args.common, "experiment")?;
    let r = resolve_common(&args.common, &file)?;
    let cfg = build_experiment(&args, &file, r.seed, r.jobs)?;
    let report = run_experiment(&cfg)?;

    let points = points_csv(&report)?;
    match r.format {
        Format::Csv => print!("{}", String::from_utf8_lossy(&points)),
        Format::Json => {
            let mut slim = report.clone();
            slim.rows.clear();
            println!("{}", serde_json::to_string_pretty(&slim)?);
        }
    }
    if let Some(out) = &r.out {
        write_json(&out.file("report.json"), &report)?;
        write_atomic(&out.file("points.csv"), &points)?;
        write_atomic(&out.file("trials.csv"), &trials_csv(&report)?)?;
        write_atomic(
            &out.file(&format!("plot_{}.csv", report.name)),
            &plot_csv(&report)?,
        )?;
        if report.name == "fig7" {
            write_atomic(&out.file("fig7_grid.csv"), &grid_csv(&report)?)?;
        }
        let eff = RunConfig {
            experiment: Some(cfg),
            ..effective("experiment", &r, file)
        };
        write_json(&out.file("effective_config.json"), &eff)?;
    }
    Ok(())
}

// -------------------------------------------------------------------- scan

/// Two unit tones over 100 samples: one on a grid atom of a 50-point grid,
/// one exactly between two atoms.
fn fixture_series() -> Series {
    let t: Vec<f64> = (0..100).map(|i| i as f64).collect();
    let y = narrowband_atom(0.21, &t)
        .into_iter()
        .zip(narrowband_atom(0.6, &t))
        .map(|(a, b)| a + b)
        .collect();
    Series {
        scheme: SamplingScheme::uniform(100),
        y,
    }
}

fn cmd_scan(args: ScanArgs) -> Result<()> {
    let file = load_config(&args.common, "scan")?;
    let r = resolve_common(&args.common, &file)?;
    let fs = file.scan.clone().unwrap_or_default();
    let fixture = args.fixture.or(fs.fixture);
    let input = args.input.clone().or_else(|| file.input.clone());
    let series = match (&input, fixture) {
        (Some(_), Some(_)) => return Err(usage_err("use either --input or --fixture")),
        (Some(p), None) => read_series(p).usage()?,
        (None, Some(_)) => fixture_series(),
        (None, None) => return Err(usage_err("scan needs --input or --fixture")),
    };
    let kind = args.kind.or(fs.kind).unwrap_or(match fixture {
        Some(Fixture::Fig2) => ScanKind::Narrowband,
        Some(Fixture::Fig4) => ScanKind::Wideband,
        None => ScanKind::Both,
    });
    let bands = args.bands.or(fs.bands).unwrap_or(50);
    let normalize = !(args.raw || fs.raw.unwrap_or(false));
    if bands < 1 {
        return Err(usage_err("--bands must be positive"));
    }
    let dims = series.scheme.dims();
    let grids = vec![BandGrid::uniform(bands).usage()?; dims];
    let build = |k: AtomKind| -> Result<Dictionary> {
        Ok(build_dictionary(&series.scheme, &grids, k, None)?)
    };
    let mut columns: Vec<(&str, Vec<f64>)> = Vec::new();
    if matches!(kind, ScanKind::Narrowband | ScanKind::Both) {
        columns.push((
            "narrowband",
            inner_product_scan(&build(AtomKind::Narrowband)?, &series.y, normalize)?,
        ));
    }
    let wide = build(AtomKind::WidebandIntegrated)?;
    if matches!(kind, ScanKind::Wideband | ScanKind::Both) {
        columns.push(("wideband", inner_product_scan(&wide, &series.y, normalize)?));
    }

    let mut header: Vec<String> = vec!["index".into()];
    for m in 1..=dims {
        header.extend([format!("lo{m}"), format!("hi{m}"), format!("center{m}")]);
    }
    header.extend(columns.iter().map(|c| c.0.to_string()));
    let h: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    let table = csv_bytes(
        &h,
        wide.cells().iter().enumerate().map(|(j, cell)| {
            let mut row = vec![j.to_string()];
            for b in cell {
                row.extend([fmt_f(b.lo), fmt_f(b.hi), fmt_f(b.center())]);
            }
            row.extend(columns.iter().map(|c| fmt_f(c.1[j])));
            row
        }),
    )?;
    match r.format {
        Format::Csv => print!("{}", String::from_utf8_lossy(&table)),
        Format::Json => {
            let obj: serde_json::Map<String, serde_json::Value> = columns
                .iter()
                .map(|(n, v)| (n.to_string(), json!(v)))
                .collect();
            println!("{}", serde_json::to_string_pretty(&obj)?);
        }
    }
    if let Some(out) = &r.out {
        write_atomic(&out.file("scan.csv"), &table)?;
        if fixture.is_some() {
            let rows = series
                .scheme
                .times(0)
                .iter()
                .zip(&series.y)
                .map(|(t, v)| vec![fmt_f(*t), fmt_f(v.re), fmt_f(v.im)]);
            write_atomic(
                &out.file("fixture.csv"),
                &csv_bytes(&["time", "re", "im"], rows)?,
            )?;
        }
        let eff = RunConfig {
            input,
            scan: Some(ScanSettings {
                bands: Some(bands),
                kind: Some(kind),
                fixture,
                raw: Some(!normalize),
            }),
            ..effective("scan", &r, file)
        };
        write_json(&out.file("effective_config.json"), &eff)?;
    }
    Ok(())
}

// ------------------------------------------------------------------- costs

fn need<T>(v: Option<T>, flag: &str, what: &str) -> Result<T> {
    v.ok_or_else(|| usage_err(format!("{what} needs {flag}")))
}

fn cmd_costs(args: CostsArgs) -> Result<()> {
    let file = load_config(&args.common, "costs")?;
    let r = resolve_common(&args.common, &file)?;
    let fc = file.costs.clone().unwrap_or_default();
    let s = CostSettings {
        bands: args.b.or(fc.bands),
        samples: args.n.or(fc.samples),
        columns: args.p.or(fc.columns),
        components: args.k.or(fc.components),
        eta: args.eta.or(fc.eta),
        stages: args.stages.or(fc.stages),
    };
    if !(args.ratio || args.budget || args.recommend || args.admm || args.table1) {
        return Err(usage_err(
            "choose at least one of --ratio, --budget, --recommend, --admm, --table1",
        ));
    }
    let mut report = serde_json::Map::new();
    let mut lines = Vec::new();
    if args.ratio {
        let (b, n) = (
            need(s.bands, "--B", "--ratio")?,
            need(s.samples, "--N", "--ratio")?,
        );
        let v = band_ratio_checked(b, n).usage()?;
        lines.push(format!(
            "band_ratio B={b} N={n}: {}{}",
            v.value,
            if v.extrapolated {
                " (outside the fitted range)"
            } else {
                ""
            }
        ));
        report.insert("band_ratio".into(), json!(v));
    }
    if args.recommend {
        let n = need(s.samples, "--N", "--recommend")?;
        let stages = s.stages.unwrap_or(1);
        let b = recommend_bands(n, stages).usage()?;
        let range = feasible_band_range(n, stages);
        let shown = range
            .map(|(a, b)| format!("{a}..={b}"))
            .unwrap_or_else(|| "none".into());
        let ratio = band_ratio_checked(b, n)?.value;
        lines.push(format!(
            "recommended B for N={n}, {stages} stage(s): {b} (ratio {ratio}, feasible {shown})"
        ));
        report.insert(
            "recommend".into(),
            json!({"bands": b, "ratio": ratio, "feasible": range}),
        );
    }
    if args.admm {
        let (n, p) = (
            need(s.samples, "--N", "--admm")?,
            need(s.columns, "--P", "--admm")?,
        );
        let c = admm_cost(n as u64, p as u64);
        lines.push(format!("admm_cost N={n} P={p}: {c}"));
        report.insert("admm_cost".into(), json!(c));
    }
    if args.budget {
        let b = zoom_budget(
            need(s.columns, "--P", "--budget")?,
            need(s.samples, "--N", "--budget")?,
            need(s.components, "--K", "--budget")?,
            need(s.eta, "--eta", "--budget")?,
            need(s.stages, "--stages", "--budget")?,
        )
        .usage()?;
        lines.push(format!(
            "budget: C1={:e} C2={:e} residual={:e} zoom={:e} fraction={:.4} within={} grid={:e} narrowband_grid={:e}",
            b.c1, b.c2, b.residual, b.zoom_cost, b.fraction_of_narrowband, b.within_budget, b.grid, b.narrowband_grid
        ));
        report.insert("budget".into(), json!(b));
    }
    if args.table1 {
        let mut rows = Vec::new();
        for row in table1_settings() {
            let v = relative_complexity(&row)?;
            lines.push(format!(
                "P={} N={} K={} bands={:?}: {v:.3}",
                row.p, row.n, row.k, row.bands
            ));
            rows.push(json!({"bands": row.bands, "relative_complexity": v}));
        }
        report.insert("table1".into(), json!(rows));
    }
    match r.format {
        Format::Csv => lines.iter().for_each(|l| println!("{l}")),
        Format::Json => println!("{}", serde_json::to_string_pretty(&report)?),
    }
    if let Some(out) = &r.out {
        write_json(&out.file("costs.json"), &report)?;
        let eff = RunConfig {
            costs: Some(s),
            ..effective("costs", &r, file)
        };
        write_json(&out.file("effective_config.json"), &eff)?;
    }
    Ok(())
}
