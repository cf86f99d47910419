use bandsparse::dict::{narrowband_atom, AtomKind, Band, SamplingScheme};
use bandsparse::sim::{generate_signal, SignalDraw};
use bandsparse::zoom::{
    band_ratio, band_ratio_checked, cluster_cells, feasible_band_range, recommend_bands, run_zoom,
    split_bands, EstimateRule, SolverChoice, ZoomPlan,
};
use bandsparse::{Error, RngSeed};

#[test]
fn single_on_grid_tone_survives_two_stages() {
    let t: Vec<f64> = (0..64).map(|i| i as f64).collect();
    let y = narrowband_atom(0.375, &t);
    let plan = ZoomPlan::with_stages(&[8, 8], AtomKind::WidebandIntegrated);
    let r = run_zoom(&y, &SamplingScheme::uniform(64), &plan).unwrap();
    assert_eq!(r.model_order, 1);
    assert!(r.covers(&[0.375]));
    // every stage keeps a band containing the tone
    for trace in &r.stage_traces {
        assert!(!trace.active.is_empty());
    }
    for stage in &r.surviving_bands {
        assert!(stage.iter().any(|c| c[0].contains(0.375)));
    }
}

#[test]
fn support_recovery_regime() {
    let n = 100;
    let scheme = SamplingScheme::uniform(n);
    let mut plan = ZoomPlan::with_stages(&[50], AtomKind::WidebandIntegrated);
    plan.alphas = vec![0.3];
    let mut recovered = 0;
    for trial in 0..100 {
        let spec = SignalDraw::new(1, 3)
            .with_spacing(2.0 / n as f64)
            .draw_seeded(RngSeed(404).derive(trial))
            .unwrap();
        let y = generate_signal(&spec, &scheme).unwrap();
        let r = run_zoom(&y, &scheme, &plan).unwrap();
        if spec.frequencies().iter().all(|f| r.covers(f)) {
            recovered += 1;
        }
    }
    assert!(recovered >= 95, "{recovered}/100");
}

#[test]
fn estimates_lie_in_final_bands_and_match_cluster_count() {
    let n = 48;
    let scheme = SamplingScheme::uniform(n);
    for (seed, rule) in [
        (1u64, EstimateRule::Midpoint),
        (2, EstimateRule::NarrowbandPeak),
    ] {
        let spec = SignalDraw::new(1, 2)
            .with_spacing(0.1)
            .draw_seeded(RngSeed(seed))
            .unwrap();
        let y = generate_signal(&spec, &scheme).unwrap();
        let plan = ZoomPlan {
            estimate: rule,
            ..ZoomPlan::with_stages(&[12, 4], AtomKind::WidebandIntegrated)
        };
        let r = run_zoom(&y, &scheme, &plan).unwrap();
        assert_eq!(r.model_order, cluster_cells(r.final_cells()).len());
        assert_eq!(r.frequencies.len(), r.model_order);
        for f in &r.frequencies {
            assert!(r.covers(f), "{f:?} outside the surviving bands");
        }
    }
}

#[test]
fn spice_pipeline_runs() {
    let n = 40;
    let scheme = SamplingScheme::uniform(n);
    let spec = SignalDraw::new(1, 2)
        .with_spacing(0.15)
        .draw_seeded(RngSeed(3))
        .unwrap();
    let y = generate_signal(&spec, &scheme).unwrap();
    let plan = ZoomPlan {
        solver: SolverChoice::Spice,
        ..ZoomPlan::with_stages(&[10, 5], AtomKind::WidebandIntegrated)
    };
    let r = run_zoom(&y, &scheme, &plan).unwrap();
    assert!(spec.frequencies().iter().all(|f| r.covers(f)));
}

#[test]
fn split_adjacent_bands_shares_edges() {
    let a = Band::new(0.25, 0.5).unwrap();
    let b = Band::new(0.5, 0.75).unwrap();
    let g = split_bands(&[a, b], 2).unwrap();
    assert_eq!(g.edges(), vec![0.25, 0.375, 0.5, 0.625, 0.75]);
    assert_eq!(g.len(), 4);
}

#[test]
fn band_ratio_values() {
    assert_eq!(band_ratio(20, 100), 0.675);
    assert!((band_ratio(4, 50) - 0.569816).abs() < 1e-15);
    assert!(!band_ratio_checked(20, 100).unwrap().extrapolated);
    assert!(band_ratio_checked(120, 100).unwrap().extrapolated);
    assert!(band_ratio_checked(20, 30).unwrap().extrapolated);
}

#[test]
fn recommended_band_counts_respect_thresholds() {
    for n in [50, 100, 200, 300, 500] {
        for stages in [1, 2] {
            let threshold = if stages == 1 { 0.81 } else { 0.66 };
            match recommend_bands(n, stages) {
                Ok(b) => {
                    assert!(band_ratio(b, n) > threshold);
                    let (lo, hi) = feasible_band_range(n, stages).unwrap();
                    assert!(lo <= b && b <= hi);
                }
                Err(Error::NoFeasibleBandCount { .. }) => {
                    assert!((4..=100).all(|b| band_ratio(b, n) <= threshold));
                }
                Err(e) => panic!("{e}"),
            }
        }
    }
    assert!(band_ratio(4, 100) < 0.81);
    assert!(band_ratio(recommend_bands(300, 2).unwrap(), 300) > 0.66);
}
