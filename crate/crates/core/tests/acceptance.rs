//! Acceptance gate. Prints one PASS/FAIL line per criterion and fails if any
//! criterion fails. Run with `cargo test --test acceptance -- --nocapture`.

mod common;

use std::time::{Duration, Instant};

use bandsparse::dict::{
    build_dictionary, wideband_atom, AtomKind, BandGrid, DpssConfig, SamplingScheme,
    DEFAULT_DPSS_RELATIVE_W,
};
use bandsparse::sim::{
    add_noise, generate_signal, relative_complexity, run_experiment, table1_settings,
    ExperimentConfig, ExperimentReport, NoiseSpec, SignalDraw,
};
use bandsparse::solve::{lambda_max, lasso_admm, lasso_objective, spice, LassoConfig, SpiceConfig};
use bandsparse::zoom::{
    band_ratio, recommend_bands, run_zoom, AdmmOptions, StageSpec, ZoomPlan, THRESHOLD_MULTI_STAGE,
    THRESHOLD_SINGLE_STAGE,
};
use bandsparse::{RngSeed, C64};
use common::{band_integral, c, cd_lasso, lasso_value, random_cmatrix, random_cvec};
use rand::Rng;

const SEED: RngSeed = RngSeed(1729);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() < limit_s
}

fn c1_wideband_quadrature() -> Outcome {
    let start = Instant::now();
    let mut rng = SEED.derive(1).rng();
    let mut times = vec![0.0, 1e-12, -1e-9, 1e-7, 3e-5, -0.01];
    while times.len() < 200 {
        times.push(rng.random::<f64>() * 400.0 - 100.0);
    }
    let mut worst = 0.0f64;
    for &t in &times {
        let lo = rng.random::<f64>() * 0.9;
        let hi = lo + 1e-4 + rng.random::<f64>() * (1.0 - lo - 1e-4);
        let closed = wideband_atom(lo, hi, &[t]).unwrap()[0];
        worst = worst.max((closed - band_integral(lo, hi, t)).norm());
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-10 && within(elapsed, 5.0),
        format!(
            "max |closed − quadrature| = {worst:.2e} over 200 pairs, {:.2}s",
            elapsed.as_secs_f64()
        ),
    )
}

fn c2_lambda_max() -> Outcome {
    let mut rng = SEED.derive(2).rng();
    let kinds = [
        AtomKind::Narrowband,
        AtomKind::WidebandIntegrated,
        AtomKind::WidebandDpss,
    ];
    let mut worst = 0.0f64;
    for inst in 0..50 {
        let n = rng.random_range(4..=64);
        let p = rng.random_range(2..=128);
        let kind = kinds[inst % 3];
        let dpss = (kind == AtomKind::WidebandDpss)
            .then(|| DpssConfig::new(n, DEFAULT_DPSS_RELATIVE_W).unwrap());
        let d = build_dictionary(
            &SamplingScheme::uniform(n),
            &[BandGrid::uniform(p).unwrap()],
            kind,
            dpss,
        )
        .unwrap();
        let y = random_cvec(&mut rng, n);
        let lmax = lambda_max(&d, &y).unwrap();
        let r = lasso_admm(&d, &y, &LassoConfig::new(1.01 * lmax, p)).unwrap();
        worst = worst.max(r.coefficients.iter().map(|z| z.norm()).fold(0.0, f64::max));
    }
    outcome(
        worst < 1e-8,
        format!("max |z_i| = {worst:.2e} over 50 instances"),
    )
}

fn c3_admm_vs_coordinate_descent() -> Outcome {
    let start = Instant::now();
    let mut rng = SEED.derive(3).rng();
    let mut worst = 0.0f64;
    for _ in 0..25 {
        let n = rng.random_range(4..=32);
        let p = rng.random_range(2..=64);
        let kind = if rng.random::<bool>() {
            AtomKind::WidebandIntegrated
        } else {
            AtomKind::Narrowband
        };
        let d = build_dictionary(
            &SamplingScheme::uniform(n),
            &[BandGrid::uniform(p).unwrap()],
            kind,
            None,
        )
        .unwrap();
        let y = random_cvec(&mut rng, n);
        let lambda = (0.05 + 0.5 * rng.random::<f64>()) * lambda_max(&d, &y).unwrap();
        let admm = lasso_admm(&d, &y, &LassoConfig::new(lambda, p)).unwrap();
        let ours = lasso_objective(d.matrix(), &y, &admm.coefficients, lambda).unwrap();
        let oracle = lasso_value(
            d.matrix(),
            &y,
            &cd_lasso(d.matrix(), &y, lambda, 1e-13, 200_000),
            lambda,
        );
        worst = worst.max((ours - oracle).abs() / oracle);
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-6 && within(elapsed, 30.0),
        format!(
            "max relative objective gap = {worst:.2e}, {:.2}s",
            elapsed.as_secs_f64()
        ),
    )
}

fn c4_table1() -> Outcome {
    let printed: Vec<String> = table1_settings()
        .iter()
        .map(|s| format!("{:.3}", relative_complexity(s).unwrap()))
        .collect();
    outcome(
        printed == ["0.001", "0.015", "0.001"],
        format!("relative complexity {printed:?}"),
    )
}

fn c5_band_ratio() -> Outcome {
    let exact = band_ratio(20, 100) == 0.675;
    let mut violations = Vec::new();
    let mut recommended = Vec::new();
    for n in [50, 100, 200, 500] {
        for stages in [1, 2, 3] {
            let threshold = if stages == 1 {
                THRESHOLD_SINGLE_STAGE
            } else {
                THRESHOLD_MULTI_STAGE
            };
            let best = (4..=100).rev().find(|&b| band_ratio(b, n) > threshold);
            match (recommend_bands(n, stages), best) {
                (Ok(b), Some(_)) => {
                    recommended.push(format!("N={n}/{stages}→{b}"));
                    if !(band_ratio(b, n) > threshold) || !(4..=100).contains(&b) {
                        violations.push(format!("N={n} stages={stages} B={b}"));
                    }
                }
                (Err(_), None) => recommended.push(format!("N={n}/{stages}→none")),
                (r, b) => violations.push(format!("N={n} stages={stages}: {r:?} vs scan {b:?}")),
            }
        }
    }
    outcome(
        exact && violations.is_empty(),
        format!(
            "band_ratio(20,100) = {}, violations {violations:?}, {}",
            band_ratio(20, 100),
            recommended.join(" ")
        ),
    )
}

fn fig7_config() -> ExperimentConfig {
    ExperimentConfig {
        trials: Some(100),
        seed: SEED,
        k: Some(3),
        sizes: Some(vec![100]),
        sweep: Some(vec![0.5]),
        alphas: Some(vec![0.3]),
        ..ExperimentConfig::named("fig7")
    }
}

fn c6_fig7(report: &ExperimentReport, elapsed: Duration) -> Outcome {
    let p = &report.points[0];
    outcome(
        p.support_recovered >= 0.95 && within(elapsed, 120.0),
        format!(
            "support recovered {:.2} (model order correct {:.2}), {:.1}s",
            p.support_recovered,
            p.model_order_correct,
            elapsed.as_secs_f64()
        ),
    )
}

fn fig6_config() -> ExperimentConfig {
    ExperimentConfig {
        trials: Some(200),
        seed: SEED,
        sweep: Some(vec![0.5]),
        ..ExperimentConfig::named("fig6")
    }
}

fn c7_fig6(report: &ExperimentReport, elapsed: Duration) -> Outcome {
    let nb = report
        .point("narrowband P=1000", 0.5)
        .unwrap()
        .model_order_correct;
    let wb = report
        .point("wideband B1=75, B2=25", 0.5)
        .unwrap()
        .model_order_correct;
    outcome(
        (wb - nb).abs() <= 0.10 && within(elapsed, 600.0),
        format!(
            "two-stage wideband {wb:.3} vs narrowband P=1000 {nb:.3}, {:.1}s",
            elapsed.as_secs_f64()
        ),
    )
}

fn fig8_config() -> ExperimentConfig {
    ExperimentConfig {
        trials: Some(200),
        seed: SEED,
        snr_db: Some(vec![20.0]),
        ..ExperimentConfig::named("fig8_lasso")
    }
}

fn c8_fig8(report: &ExperimentReport, elapsed: Duration) -> Outcome {
    let nb = report.point("narrowband P=100", 20.0).unwrap();
    let wb = report.point("wideband B1=20, B2=5", 20.0).unwrap();
    let bound = (1.0f64 / 100.0).powi(2) / 3.0;
    let mse = wb.mse.unwrap_or(f64::INFINITY);
    outcome(
        nb.model_order_correct <= 0.55 && wb.model_order_correct >= 0.85 && mse <= bound && within(elapsed, 600.0),
        format!(
            "narrowband {:.3} (≤ 0.55), wideband {:.3} (≥ 0.85), wideband MSE {mse:.2e} (≤ {bound:.2e}), {:.1}s",
            nb.model_order_correct,
            wb.model_order_correct,
            elapsed.as_secs_f64()
        ),
    )
}

fn fig5_config() -> ExperimentConfig {
    ExperimentConfig {
        trials: Some(500),
        seed: SEED,
        snr_db: Some(vec![0.0, 5.0, 10.0, 15.0, 20.0]),
        ..ExperimentConfig::named("fig5")
    }
}

fn c9_fig5(report: &ExperimentReport, elapsed: Duration) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for snr in [0.0, 5.0, 10.0, 15.0, 20.0] {
        let nb = report
            .point("narrowband", snr)
            .and_then(|p| p.value)
            .unwrap();
        let wb = report.point("wideband", snr).and_then(|p| p.value).unwrap();
        ok &= wb < nb;
        parts.push(format!("{snr}dB {wb:.3}<{nb:.3}"));
    }
    outcome(
        ok && within(elapsed, 300.0),
        format!("{}, {:.1}s", parts.join(" "), elapsed.as_secs_f64()),
    )
}

/// `(true bin, argmax bin, monotone)` per trial.
fn spice_trials() -> Vec<(usize, usize, bool)> {
    let n = 64;
    let scheme = SamplingScheme::uniform(n);
    let d = build_dictionary(
        &scheme,
        &[BandGrid::uniform(n).unwrap()],
        AtomKind::Narrowband,
        None,
    )
    .unwrap();
    (0..100u64)
        .map(|trial| {
            let mut rng = SEED.derive(10).derive(trial).rng();
            let bin = rng.random_range(0..n);
            let f = d.cell(bin)[0].center();
            let phase = rng.random::<f64>() * std::f64::consts::TAU;
            let clean: Vec<C64> = (0..n)
                .map(|t| C64::from_polar(1.0, 2.0 * std::f64::consts::PI * f * t as f64 + phase))
                .collect();
            let y = add_noise(&clean, NoiseSpec::new(30.0), &mut rng).unwrap();
            let r = spice(&d, &y, &SpiceConfig::default()).unwrap();
            let best = (0..n)
                .max_by(|&a, &b| r.coefficients[a].re.total_cmp(&r.coefficients[b].re))
                .unwrap();
            let monotone = r.criterion_trace.windows(2).all(|w| w[1] <= w[0]);
            (bin, best, monotone)
        })
        .collect()
}

fn c10_spice(trials: &[(usize, usize, bool)]) -> Outcome {
    let hits = trials.iter().filter(|(b, a, _)| b == a).count();
    let monotone = trials.iter().filter(|t| t.2).count();
    outcome(
        hits >= 95 && monotone == trials.len(),
        format!("argmax at true bin {hits}/100, monotone criterion {monotone}/100"),
    )
}

fn c11_speed() -> Outcome {
    let n = 256;
    let scheme = SamplingScheme::uniform(n);
    let spec = SignalDraw::new(1, 3)
        .with_spacing(4.0 / n as f64)
        .draw_seeded(SEED.derive(11))
        .unwrap();
    let clean = generate_signal(&spec, &scheme).unwrap();
    let y = add_noise(&clean, NoiseSpec::new(20.0), &mut SEED.derive(12).rng()).unwrap();
    let admm = AdmmOptions::default();
    let plan = |stages: Vec<StageSpec>| ZoomPlan {
        stages,
        alphas: vec![0.3],
        admm,
        ..ZoomPlan::default()
    };
    let wide = plan(vec![
        StageSpec::new(40, AtomKind::WidebandIntegrated),
        StageSpec::new(50, AtomKind::WidebandIntegrated),
    ]);
    let narrow = plan(vec![StageSpec::new(2000, AtomKind::Narrowband)]);
    let best_of = |p: &ZoomPlan| {
        (0..3)
            .map(|_| {
                let t = Instant::now();
                run_zoom(&y, &scheme, p).unwrap();
                t.elapsed().as_secs_f64()
            })
            .fold(f64::INFINITY, f64::min)
    };
    let (tw, tn) = (best_of(&wide), best_of(&narrow));
    outcome(
        tw <= tn / 5.0,
        format!(
            "two-stage wideband {tw:.4}s vs narrowband P=2000 {tn:.4}s, speed-up {:.1}×",
            tn / tw
        ),
    )
}

fn timed(cfg: &ExperimentConfig) -> (ExperimentReport, Duration) {
    let t = Instant::now();
    let r = run_experiment(cfg).unwrap();
    (r, t.elapsed())
}

#[test]
fn acceptance_criteria() {
    let mut results: Vec<(usize, &str, Outcome)> = vec![
        (1, "wideband atom vs quadrature", c1_wideband_quadrature()),
        (2, "lambda_max gives zero solution", c2_lambda_max()),
        (
            3,
            "ADMM vs coordinate descent",
            c3_admm_vs_coordinate_descent(),
        ),
        (4, "complexity table", c4_table1()),
        (5, "band ratio rule", c5_band_ratio()),
    ];

    let (fig7, t7) = timed(&fig7_config());
    results.push((6, "support recovery slice", c6_fig7(&fig7, t7)));
    let (fig6, t6) = timed(&fig6_config());
    results.push((7, "model order vs alpha", c7_fig6(&fig6, t6)));
    let (fig8, t8) = timed(&fig8_config());
    results.push((8, "narrowband vs wideband contrast", c8_fig8(&fig8, t8)));
    let (fig5, t5) = timed(&fig5_config());
    results.push((9, "smallest-peak spread", c9_fig5(&fig5, t5)));
    let spice_runs = spice_trials();
    results.push((10, "SPICE sanity", c10_spice(&spice_runs)));
    results.push((11, "zoom speed-up", c11_speed()));

    let mut same = Vec::new();
    for (name, cfg, first) in [
        ("6", fig7_config(), &fig7),
        ("7", fig6_config(), &fig6),
        ("8", fig8_config(), &fig8),
        ("9", fig5_config(), &fig5),
    ] {
        let again = run_experiment(&cfg).unwrap();
        let equal = serde_json::to_string(&again.without_timing()).unwrap()
            == serde_json::to_string(&first.without_timing()).unwrap();
        same.push((name, equal));
    }
    same.push(("10", spice_trials() == spice_runs));
    let all_same = same.iter().all(|s| s.1);
    results.push((
        12,
        "determinism",
        outcome(
            all_same,
            format!(
                "bit-identical reruns: {}",
                same.iter()
                    .map(|(n, e)| format!("{n}={e}"))
                    .collect::<Vec<_>>()
                    .join(" ")
            ),
        ),
    ));

    for (id, name, o) in &results {
        println!(
            "{} [{id:>2}] {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    let failed: Vec<usize> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

#[test]
fn spot_checks_stay_cheap() {
    // a tiny instance of each oracle so failures show up without the full gate
    let mut rng = SEED.derive(99).rng();
    let a = random_cmatrix(&mut rng, 6, 4);
    let y = random_cvec(&mut rng, 6);
    let z = cd_lasso(&a, &y, 0.0, 1e-14, 100_000);
    let g = a.gram();
    let rhs = a.hermitian_product(&y).unwrap();
    let ls = common::exact_solve(&g, &rhs);
    assert!(common::max_abs_diff(&z, &ls) < 1e-9);
    let v = band_integral(0.2, 0.3, 0.0);
    assert!((v - c(0.1, 0.0)).norm() < 1e-13);
}
