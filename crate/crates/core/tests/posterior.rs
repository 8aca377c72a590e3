use proptest::prelude::*;
use wim_core::distributions::Distribution;
use wim_core::numeric::{integrate_pieces, Tolerance};
use wim_core::posterior::{conjugate_posterior, log_posterior_unnorm, BayesModel, Likelihood, PriorSpec};

fn prior_for(l: &Likelihood, a: f64, b: f64) -> PriorSpec {
    match l {
        Likelihood::PoissonIid => PriorSpec::gamma(a, b).unwrap(),
        Likelihood::BinomialCount { .. } => PriorSpec::beta(a, b).unwrap(),
        _ => PriorSpec::inverse_gamma(a, b).unwrap(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sequential_updating_equals_one_shot(
        kind in 0usize..3,
        a in 0.2f64..5.0,
        b in 0.2f64..5.0,
        x in prop::collection::vec(0u32..8, 1..8),
        y in prop::collection::vec(0u32..8, 1..8),
    ) {
        let l = match kind {
            0 => Likelihood::PoissonIid,
            1 => Likelihood::BinomialCount { trials: 8 },
            _ => Likelihood::NormalKnownMean { mean: 1.0 },
        };
        let x: Vec<f64> = x.into_iter().map(f64::from).collect();
        let y: Vec<f64> = y.into_iter().map(f64::from).collect();
        let first = conjugate_posterior(&BayesModel::new(l.clone(), x.clone(), prior_for(&l, a, b)).unwrap()).unwrap();
        let second = BayesModel::new(l.clone(), y.clone(), PriorSpec::Proper(first)).unwrap();
        let all = BayesModel::new(l.clone(), [x, y].concat(), prior_for(&l, a, b)).unwrap();
        let (p, q) = (conjugate_posterior(&second).unwrap().params(), conjugate_posterior(&all).unwrap().params());
        for (u, v) in p.iter().zip(&q) {
            prop_assert!((u - v).abs() <= 1e-12 * v.abs().max(1.0));
        }
    }
}

#[test]
fn normalised_unnormalised_posterior_matches_the_conjugate_cdf() {
    let cases = [
        (Likelihood::PoissonIid, vec![3.0, 0.0, 5.0, 2.0], PriorSpec::gamma(1.5, 0.5).unwrap()),
        (Likelihood::PoissonIid, vec![1.0, 1.0], PriorSpec::gamma(0.5, 0.0).unwrap()),
        (Likelihood::BinomialCount { trials: 12 }, vec![4.0, 9.0], PriorSpec::beta(0.5, 0.5).unwrap()),
        (Likelihood::BinomialCount { trials: 5 }, vec![2.0], PriorSpec::beta(0.0, 0.0).unwrap()),
        (Likelihood::NormalKnownMean { mean: 0.0 }, vec![0.3, -1.2, 2.2, 0.8, -0.4], PriorSpec::JeffreysVariance),
        (Likelihood::NormalKnownMean { mean: 0.0 }, vec![0.3, -1.2, 2.2, 0.8], PriorSpec::inverse_gamma(2.0, 1.0).unwrap()),
    ];
    for (l, data, prior) in cases {
        let model = BayesModel::new(l, data, prior).unwrap();
        let post = conjugate_posterior(&model).unwrap();
        let (lo, hi) = post.effective_range().unwrap();
        let mode = post.quantile(0.5).unwrap();
        let shift = log_posterior_unnorm(&model, &[mode]);
        let dens = |t: f64| (log_posterior_unnorm(&model, &[t]) - shift).exp();
        let tol = Tolerance::new(0.0, 1e-12);
        let (a, b) = post.support();
        let a = if a.is_finite() { a } else { lo };
        let total = integrate_pieces(&dens, &[a, lo, mode, hi], tol).unwrap().value;
        for k in 1..=21 {
            let t = post.quantile(k as f64 / 22.0).unwrap();
            let mass = integrate_pieces(&dens, &[a, lo, t], tol).unwrap().value / total;
            assert!((mass - post.cdf(t)).abs() < 1e-6, "{post:?} at {t}: {mass} vs {}", post.cdf(t));
        }
        assert!(b > hi || !b.is_finite() || b == hi);
    }
}

#[test]
fn improper_priors_need_enough_data() {
    let flat_var = BayesModel::new(Likelihood::NormalKnownMean { mean: 0.0 }, vec![1.0, 2.0], PriorSpec::Flat).unwrap();
    assert!(conjugate_posterior(&flat_var).is_err());
    let ok = flat_var.with_extra_data(&[0.5]);
    assert_eq!(conjugate_posterior(&ok).unwrap(), Distribution::inverse_gamma(0.5, 2.625).unwrap());
}
