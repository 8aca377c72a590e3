use rand::Rng;
use wim_core::distributions::Distribution;
use wim_core::impact::{neutrality, wim, WimConfig};
use wim_core::numeric::summary::median;
use wim_core::posterior::{conjugate_posterior, BayesModel, Likelihood, Posterior, PriorSpec};
use wim_core::rng::stream;

fn median_wim(l: &Likelihood, truth: &Distribution, n: usize, p1: &PriorSpec, p2: &PriorSpec) -> f64 {
    let mut rng = stream(n as u64);
    let values: Vec<f64> = (0..30)
        .map(|_| {
            let data = truth.sample(&mut rng, n);
            let m = BayesModel::new(l.clone(), data, p1.clone()).unwrap();
            let a = Posterior::Analytic(conjugate_posterior(&m).unwrap());
            let b = Posterior::Analytic(conjugate_posterior(&m.with_prior(p2.clone())).unwrap());
            wim(&a, &b, &WimConfig::default()).unwrap().wim
        })
        .collect();
    median(&values)
}

#[test]
fn prior_impact_wanes_with_sample_size() {
    let cases = [
        (
            Likelihood::PoissonIid,
            Distribution::poisson(5.0).unwrap(),
            PriorSpec::gamma(2.5, 2.5).unwrap(),
            PriorSpec::gamma(0.5, 0.0).unwrap(),
        ),
        (
            Likelihood::BinomialCount { trials: 1 },
            Distribution::binomial(1, 0.3).unwrap(),
            PriorSpec::Flat,
            PriorSpec::beta(0.5, 0.5).unwrap(),
        ),
        (
            Likelihood::NormalKnownMean { mean: 0.0 },
            Distribution::normal(0.0, 1.0).unwrap(),
            PriorSpec::JeffreysVariance,
            PriorSpec::inverse_gamma(1.0, 1.0).unwrap(),
        ),
    ];
    for (l, truth, p1, p2) in cases {
        let small = median_wim(&l, &truth, 10, &p1, &p2);
        let large = median_wim(&l, &truth, 200, &p1, &p2);
        assert!(large < small, "{l:?}: n=200 {large} vs n=10 {small}");
    }
}

#[test]
fn sampled_route_tracks_quadrature() {
    let mut rng = stream(8);
    for seed in 0..10 {
        let a = Distribution::beta(rng.random_range(1.0..30.0), rng.random_range(1.0..30.0)).unwrap();
        let b = Distribution::beta(rng.random_range(1.0..30.0), rng.random_range(1.0..30.0)).unwrap();
        let (pa, pb) = (Posterior::Analytic(a), Posterior::Analytic(b));
        let exact = wim(&pa, &pb, &WimConfig::default()).unwrap().wim;
        let s = wim(&pa, &pb, &WimConfig::default().with_seed(seed).sampled()).unwrap();
        let se = s.wim_se.unwrap();
        assert!((s.wim - exact).abs() <= 5.0 * se + 1e-9, "{} vs {exact} (se {se})", s.wim);
    }
}

#[test]
fn neutrality_of_sampled_and_analytic_posteriors_agree() {
    let d = Distribution::gamma(12.0, 3.0).unwrap();
    let cloud = wim_core::transport::EmpiricalMeasure::from_1d(d.sample(&mut stream(2), 20_000)).unwrap();
    let a = neutrality(&Posterior::Analytic(d), 3.5).unwrap().value;
    let s = neutrality(&Posterior::Sampled { cloud, diagnostics: None }, 3.5).unwrap().value;
    assert!((a - s).abs() < 0.015, "{a} vs {s}");
}
