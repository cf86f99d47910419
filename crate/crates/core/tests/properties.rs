mod common;

use bandsparse::dict::{
    build_dictionary, torus_distance, wrap_frequency, AtomKind, Band, BandGrid, SamplingScheme,
};
use bandsparse::numerics::{kron_vectors, norm2};
use bandsparse::sim::{min_cost_assignment, SignalDraw};
use bandsparse::solve::{
    active_indices, lambda_max, lasso_admm, soft_threshold, spice, LassoConfig, SpiceConfig,
};
use bandsparse::zoom::{band_ratio, split_bands};
use bandsparse::{RngSeed, C64};
use common::random_cvec;
use proptest::prelude::*;
use rand::Rng;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn split_children_tile_parent(lo in 0.0f64..0.9, width in 1e-3f64..0.1, count in 2usize..12) {
        let hi = (lo + width).min(1.0);
        let parent = Band::new(lo, hi).unwrap();
        let kids = parent.split(count);
        prop_assert_eq!(kids.len(), count);
        prop_assert_eq!(kids[0].lo, lo);
        prop_assert_eq!(kids[count - 1].hi, hi);
        for w in kids.windows(2) {
            prop_assert_eq!(w[0].hi, w[1].lo);
        }
        for k in &kids {
            prop_assert!((k.width() - (hi - lo) / count as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn split_grid_edges_strictly_increase(start in 0usize..10, runs in 1usize..5, count in 2usize..6) {
        let base = BandGrid::uniform(16).unwrap();
        let parents: Vec<Band> = (start..(start + runs).min(16)).map(|i| base.bands()[i]).collect();
        let g = split_bands(&parents, count).unwrap();
        prop_assert_eq!(g.len(), parents.len() * count);
        let e = g.edges();
        prop_assert!(e.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn torus_distance_is_a_wrapped_metric(a in -2.0f64..3.0, b in -2.0f64..3.0) {
        let d = torus_distance(a, b);
        prop_assert!((0.0..=0.5).contains(&d));
        prop_assert!((d - torus_distance(b, a)).abs() < 1e-12);
        prop_assert!((d - torus_distance(wrap_frequency(a), wrap_frequency(b))).abs() < 1e-12);
        let w = wrap_frequency(a);
        prop_assert!((0.0..1.0).contains(&w));
    }

    #[test]
    fn soft_threshold_shrinks_modulus_keeps_phase(re in -5.0f64..5.0, im in -5.0f64..5.0, kappa in 0.0f64..4.0) {
        let x = C64::new(re, im);
        let s = soft_threshold(&[x], kappa)[0];
        prop_assert!((s.norm() - (x.norm() - kappa).max(0.0)).abs() < 1e-12);
        if s.norm() > 1e-12 {
            prop_assert!((s / s.norm() - x / x.norm()).norm() < 1e-12);
        }
    }

    #[test]
    fn active_set_is_consistent(values in prop::collection::vec(-1.0f64..1.0, 1..20), eps in 0.0f64..0.5) {
        let z: Vec<C64> = values.iter().map(|&v| C64::new(v, 0.0)).collect();
        let act = active_indices(&z, eps);
        let max = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
        for (i, v) in values.iter().enumerate() {
            prop_assert_eq!(act.contains(&i), max > 0.0 && v.abs() > eps * max);
        }
    }

    #[test]
    fn band_ratio_matches_polynomial(b in 1usize..200, n in 1usize..1000) {
        let (bf, nf) = (b as f64, n as f64);
        let poly = (-0.49 * bf * bf + 90.0 * bf + 5546.0 - 4.0 * nf) / 1e4;
        prop_assert!((band_ratio(b, n) - poly).abs() < 1e-12);
    }

    #[test]
    fn kron_norm_is_multiplicative(seed in any::<u64>(), n1 in 1usize..6, n2 in 1usize..6) {
        let mut rng = RngSeed(seed).rng();
        let a = random_cvec(&mut rng, n1);
        let b = random_cvec(&mut rng, n2);
        let k = kron_vectors(&[a.as_slice(), b.as_slice()]);
        prop_assert_eq!(k.len(), n1 * n2);
        prop_assert!((norm2(&k) - norm2(&a) * norm2(&b)).abs() < 1e-12 * (1.0 + norm2(&k)));
        prop_assert_eq!(k[1 % k.len()], if n1 > 1 { a[1] * b[0] } else if n2 > 1 { a[0] * b[1] } else { a[0] * b[0] });
    }

    #[test]
    fn seeds_reproduce_streams(seed in any::<u64>(), stream in any::<u64>()) {
        let mut a = RngSeed(seed).derive(stream).rng();
        let mut b = RngSeed(seed).derive(stream).rng();
        for _ in 0..8 {
            prop_assert_eq!(a.random::<u64>(), b.random::<u64>());
        }
    }

    #[test]
    fn drawn_frequencies_respect_spacing(seed in any::<u64>(), k in 1usize..6, dims in 1usize..3) {
        let spec = SignalDraw::new(dims, k).with_spacing(0.05).draw_seeded(RngSeed(seed)).unwrap();
        let f = spec.frequencies();
        prop_assert_eq!(f.len(), k);
        for x in &f {
            prop_assert_eq!(x.len(), dims);
            prop_assert!(x.iter().all(|v| (0.0..1.0).contains(v)));
        }
        for i in 0..k {
            for j in (i + 1)..k {
                for m in 0..dims {
                    prop_assert!(torus_distance(f[i][m], f[j][m]) >= 0.05);
                }
            }
        }
    }

    #[test]
    fn hungarian_is_optimal(costs in prop::collection::vec(0.0f64..10.0, 16)) {
        let m: Vec<Vec<f64>> = costs.chunks(4).map(|r| r.to_vec()).collect();
        let a = min_cost_assignment(&m);
        let total = |p: &[usize]| p.iter().enumerate().map(|(i, &j)| m[i][j]).sum::<f64>();
        let mut best = f64::INFINITY;
        let mut perm = [0usize, 1, 2, 3];
        permute(&mut perm, 0, &mut |p| best = best.min(total(p)));
        prop_assert!((total(&a) - best).abs() < 1e-9);
    }
}

fn permute(p: &mut [usize; 4], k: usize, f: &mut impl FnMut(&[usize])) {
    if k == p.len() {
        f(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permute(p, k + 1, f);
        p.swap(k, i);
    }
}

proptest! {
    #![proptest_config(config(16))]

    #[test]
    fn dictionary_shape_and_norms(n1 in 2usize..10, n2 in 1usize..6, p1 in 2usize..8, p2 in 1usize..5, wide in any::<bool>()) {
        let kind = if wide { AtomKind::WidebandIntegrated } else { AtomKind::Narrowband };
        let d = build_dictionary(
            &SamplingScheme::uniform_grid(&[n1, n2]),
            &[BandGrid::uniform(p1).unwrap(), BandGrid::uniform(p2).unwrap()],
            kind,
            None,
        ).unwrap();
        prop_assert_eq!(d.len(), p1 * p2);
        prop_assert_eq!(d.rows(), n1 * n2);
        for j in 0..d.len() {
            prop_assert!((norm2(d.matrix().col(j)) - 1.0).abs() < 1e-12);
            prop_assert!(d.matrix().col(j).iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn lambda_above_max_gives_zero(seed in any::<u64>(), n in 4usize..24, p in 2usize..40) {
        let d = build_dictionary(&SamplingScheme::uniform(n), &[BandGrid::uniform(p).unwrap()], AtomKind::WidebandIntegrated, None).unwrap();
        let y = random_cvec(&mut RngSeed(seed).rng(), n);
        let lmax = lambda_max(&d, &y).unwrap();
        let r = lasso_admm(&d, &y, &LassoConfig::new(1.01 * lmax, p)).unwrap();
        prop_assert!(r.coefficients.iter().all(|z| z.norm() < 1e-8));
        prop_assert!(r.objective.is_finite());
    }

    #[test]
    fn spice_powers_nonnegative_and_monotone(seed in any::<u64>(), n in 6usize..20, p in 2usize..16) {
        let d = build_dictionary(&SamplingScheme::uniform(n), &[BandGrid::uniform(p).unwrap()], AtomKind::WidebandIntegrated, None).unwrap();
        let y = random_cvec(&mut RngSeed(seed).rng(), n);
        let r = spice(&d, &y, &SpiceConfig::default()).unwrap();
        prop_assert!(r.coefficients.iter().all(|c| c.re >= 0.0 && c.im == 0.0));
        prop_assert!(r.criterion_trace.windows(2).all(|w| w[1] <= w[0]));
        let act = active_indices(&r.coefficients, SpiceConfig::default().eps_act);
        prop_assert_eq!(act, r.active_set);
    }
}
