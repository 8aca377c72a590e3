use proptest::prelude::*;
use rand::Rng;
use wim_core::distributions::Distribution;
use wim_core::rng::stream;
use wim_core::transport::{
    w1_cdf, w1_distributions, w1_empirical_1d, w1_quantile, wp_empirical, wp_empirical_1d, EmpiricalMeasure,
    W_TOLERANCE,
};

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// Optimal assignment by enumeration: with equal sizes and uniform weights
/// some optimal plan is a permutation.
fn brute_force(p: f64, a: &EmpiricalMeasure, b: &EmpiricalMeasure) -> f64 {
    let n = a.len();
    let best = permutations(n)
        .into_iter()
        .map(|perm| {
            (0..n)
                .map(|i| {
                    let d2: f64 = a.point(i).iter().zip(b.point(perm[i])).map(|(x, y)| (x - y) * (x - y)).sum();
                    d2.sqrt().powf(p)
                })
                .sum::<f64>()
                / n as f64
        })
        .fold(f64::INFINITY, f64::min);
    best.powf(1.0 / p)
}

#[test]
fn simplex_matches_permutation_brute_force() {
    let mut rng = stream(11);
    for _ in 0..200 {
        let n = rng.random_range(1..=6);
        let d = rng.random_range(1..=3);
        let p = if rng.random_bool(0.5) { 1.0 } else { 2.0 };
        let a = EmpiricalMeasure::new((0..n * d).map(|_| rng.random_range(-3.0..3.0)).collect(), d).unwrap();
        let b = EmpiricalMeasure::new((0..n * d).map(|_| rng.random_range(-3.0..3.0)).collect(), d).unwrap();
        let (w, plan) = wp_empirical(p, &a, &b).unwrap();
        let oracle = brute_force(p, &a, &b);
        assert!((w - oracle).abs() <= 1e-10, "n={n} d={d} p={p}: {w} vs {oracle}");
        let mass: f64 = plan.pairs.iter().map(|t| t.2).sum();
        assert!((mass - 1.0).abs() < 1e-12);
    }
}

#[test]
fn unequal_one_dimensional_clouds_agree_with_the_simplex() {
    let mut rng = stream(5);
    for _ in 0..50 {
        let n = rng.random_range(1..=9);
        let m = rng.random_range(1..=9);
        let a: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..5.0)).collect();
        let b: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..4.0)).collect();
        for p in [1.0, 2.0] {
            let sorted = wp_empirical_1d(p, &a, &b).unwrap();
            let (lp, _) = wp_empirical(
                p,
                &EmpiricalMeasure::from_1d(a.clone()).unwrap(),
                &EmpiricalMeasure::from_1d(b.clone()).unwrap(),
            )
            .unwrap();
            assert!((sorted - lp).abs() < 1e-10, "{sorted} vs {lp}");
        }
    }
}

#[test]
fn cdf_and_quantile_routes_agree_on_conjugate_posteriors() {
    let mut rng = stream(21);
    for _ in 0..20 {
        let s = rng.random_range(0..60) as f64;
        let n = 10.0;
        let a = Distribution::gamma(rng.random_range(0.5..5.0) + s, rng.random_range(0.0..5.0) + n).unwrap();
        let b = Distribution::gamma(rng.random_range(0.5..5.0) + s, rng.random_range(0.0..5.0) + n).unwrap();
        let c = w1_distributions(&a, &b).unwrap().value;
        let q = w1_quantile(|u| a.quantile(u).unwrap(), |u| b.quantile(u).unwrap(), W_TOLERANCE)
            .unwrap()
            .value;
        assert!((c - q).abs() < 1e-6, "{c} vs {q}");
    }
}

#[test]
fn finite_support_cdf_route() {
    // Beta(2,1) vs Beta(1,1): ∫ |x² - x| dx on [0, 1] = 1/6.
    let a = Distribution::beta(2.0, 1.0).unwrap();
    let b = Distribution::beta(1.0, 1.0).unwrap();
    let w = w1_cdf(|x| a.cdf(x), |x| b.cdf(x), 0.0, 1.0, W_TOLERANCE).unwrap();
    assert!((w.value - 1.0 / 6.0).abs() < 1e-12);
}

proptest! {
    #[test]
    fn empirical_w1_is_a_metric(
        a in prop::collection::vec(-10.0f64..10.0, 1..30),
        b in prop::collection::vec(-10.0f64..10.0, 1..30),
        c in prop::collection::vec(-10.0f64..10.0, 1..30),
    ) {
        let ab = w1_empirical_1d(&a, &b).unwrap();
        let ba = w1_empirical_1d(&b, &a).unwrap();
        let ac = w1_empirical_1d(&a, &c).unwrap();
        let cb = w1_empirical_1d(&c, &b).unwrap();
        prop_assert!((ab - ba).abs() < 1e-12);
        prop_assert!(ab <= ac + cb + 1e-12);
        prop_assert!(w1_empirical_1d(&a, &a).unwrap().abs() < 1e-12);
    }

    #[test]
    fn shifting_a_cloud_moves_w1_by_the_shift(
        a in prop::collection::vec(-10.0f64..10.0, 1..40),
        shift in -5.0f64..5.0,
    ) {
        let b: Vec<f64> = a.iter().map(|x| x + shift).collect();
        prop_assert!((w1_empirical_1d(&a, &b).unwrap() - shift.abs()).abs() < 1e-9);
    }

    #[test]
    fn w1_never_exceeds_w2(
        a in prop::collection::vec(-10.0f64..10.0, 1..25),
        b in prop::collection::vec(-10.0f64..10.0, 1..25),
    ) {
        let w1 = wp_empirical_1d(1.0, &a, &b).unwrap();
        let w2 = wp_empirical_1d(2.0, &a, &b).unwrap();
        prop_assert!(w1 <= w2 + 1e-12);
    }
}
