//! The prior-impact measures: WIM, Neutrality and MOPESS, plus bootstrap
//! uncertainty for the WIM.
//!
//! The WIM of two posteriors is their 1-Wasserstein distance. Two closed-form
//! 1-D posteriors are compared by quadrature of `|F₁ - F₂|`; everything else
//! goes through draws.

mod bootstrap;
mod mopess;
mod neutrality;

pub use bootstrap::{bootstrap_wim, bootstrap_wim_with, resample_indices, BootstrapConfig, BootstrapReport};
pub use mopess::{mopess, MopessConfig, MopessReport};
pub use neutrality::{mle, neutrality, Neutrality};

use rand::Rng;
use serde::Serialize;

use crate::bounds::{
    binomial_bounds, normal_ig_bounds, poisson_gamma_exact, theorem1_bounds, BinomialVariant, BoundsReport,
    DensityRatio, Monotonicity,
};
use crate::distributions::{Distribution, InverseCdf};
use crate::error::{invalid, Result, WimError};
use crate::numeric::summary::sd;
use crate::posterior::{conjugate_posterior, BayesModel, Likelihood, Posterior, PriorSpec};
use crate::rng::{child_stream, stream};
use crate::transport::{
    subsampled_wp, w1_distributions, wp_distributions, wp_empirical, wp_empirical_1d, EmpiricalMeasure,
};

/// How draws of two closed-form posteriors are paired on the sampled route.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Coupling {
    /// One uniform vector pushed through both inverse cdfs.
    Shared,
    /// Independent draws for each posterior.
    Independent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Route {
    /// Quadrature for two closed-form 1-D posteriors, draws otherwise.
    Auto,
    Analytic,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WimConfig {
    /// Draws per closed-form posterior on the sampled route.
    pub draws: usize,
    pub seed: u64,
    /// Wasserstein order; 1 gives the WIM.
    pub order: f64,
    pub coupling: Coupling,
    pub route: Route,
    /// Subsample size for multivariate clouds.
    pub subsample: usize,
    /// Number of subsamples for multivariate clouds.
    pub subsample_repeats: usize,
}

impl Default for WimConfig {
    fn default() -> Self {
        WimConfig {
            draws: 10_000,
            seed: 0,
            order: 1.0,
            coupling: Coupling::Shared,
            route: Route::Auto,
            subsample: 2_000,
            subsample_repeats: 10,
        }
    }
}

impl WimConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn sampled(mut self) -> Self {
        self.route = Route::Sampled;
        self
    }
}

/// A distance between two posteriors and how it was obtained.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WimValue {
    pub wim: f64,
    /// Monte Carlo standard error; `None` on the quadrature route.
    pub wim_se: Option<f64>,
    pub method: &'static str,
}

/// Everything known about the impact of swapping one prior for another.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImpactReport {
    pub wim: f64,
    pub wim_se: Option<f64>,
    pub method: &'static str,
    /// Neutrality under prior 1 and prior 2.
    pub neutrality: Option<[Neutrality; 2]>,
    pub mopess: Option<MopessReport>,
    pub bounds: Option<BoundsReport>,
    /// `|wim - exact|` when the bounds pin down the exact distance.
    pub exact_gap: Option<f64>,
    pub config: WimConfig,
}

const HALF_SPLITS: usize = 10;

/// The Wasserstein distance of order `cfg.order` between two posteriors.
pub fn wim(post1: &Posterior, post2: &Posterior, cfg: &WimConfig) -> Result<WimValue> {
    if post1.dim() != post2.dim() {
        return Err(WimError::DimensionMismatch {
            left: post1.dim(),
            right: post2.dim(),
        });
    }
    if !(cfg.order >= 1.0 && cfg.order.is_finite()) {
        return Err(invalid(format!("order must be finite and >= 1, got {}", cfg.order)));
    }
    match (post1, post2, cfg.route) {
        (Posterior::Analytic(a), Posterior::Analytic(b), Route::Auto | Route::Analytic) => {
            let r = if cfg.order == 1.0 {
                w1_distributions(a, b)?
            } else {
                wp_distributions(cfg.order, a, b)?
            };
            Ok(WimValue {
                wim: r.value,
                wim_se: None,
                method: "quadrature",
            })
        }
        (_, _, Route::Analytic) => Err(WimError::Unsupported(
            "the analytic route needs two closed-form posteriors".into(),
        )),
        (Posterior::Analytic(a), Posterior::Analytic(b), Route::Sampled) => match cfg.coupling {
            Coupling::Shared => coupled(a, b, cfg),
            Coupling::Independent => {
                let x = draws(a, cfg.draws, cfg.seed, 1)?;
                let y = draws(b, cfg.draws, cfg.seed, 2)?;
                clouds(&x, &y, cfg)
            }
        },
        _ => {
            let x = cloud_of(post1, cfg, 1)?;
            let y = cloud_of(post2, cfg, 2)?;
            clouds(&x, &y, cfg)
        }
    }
}

fn draws(d: &Distribution, n: usize, seed: u64, which: u64) -> Result<EmpiricalMeasure> {
    if n == 0 {
        return Err(invalid("draw count must be positive"));
    }
    let table = InverseCdf::new(d)?;
    let mut rng = child_stream(seed, &[which]);
    EmpiricalMeasure::from_1d((0..n).map(|_| table.eval(rng.random())).collect())
}

fn cloud_of(post: &Posterior, cfg: &WimConfig, which: u64) -> Result<EmpiricalMeasure> {
    match post {
        Posterior::Analytic(d) => draws(d, cfg.draws, cfg.seed, which),
        Posterior::Sampled { cloud, .. } => Ok(cloud.clone()),
    }
}

/// Shared-uniform draws: `x_i = Q₁(u_i)`, `y_i = Q₂(u_i)`. Both are monotone
/// in `u`, so the index pairing is the optimal one.
fn coupled(a: &Distribution, b: &Distribution, cfg: &WimConfig) -> Result<WimValue> {
    if cfg.draws < 2 {
        return Err(invalid("the sampled route needs at least two draws"));
    }
    let ta = InverseCdf::new(a)?;
    let tb = InverseCdf::new(b)?;
    let mut rng = stream(cfg.seed);
    let p = cfg.order;
    let terms: Vec<f64> = (0..cfg.draws)
        .map(|_| {
            let u: f64 = rng.random();
            (ta.eval(u) - tb.eval(u)).abs().powf(p)
        })
        .collect();
    if terms.iter().any(|t| !t.is_finite()) {
        return Err(WimError::Divergence("non-finite draw on the coupled route".into()));
    }
    let mean_p = terms.iter().sum::<f64>() / terms.len() as f64;
    let se_p = sd(&terms) / (terms.len() as f64).sqrt();
    let wim = mean_p.powf(1.0 / p);
    // Delta method for the p-th root.
    let wim_se = if p == 1.0 {
        se_p
    } else if wim > 0.0 {
        se_p / (p * wim.powf(p - 1.0))
    } else {
        0.0
    };
    Ok(WimValue {
        wim,
        wim_se: Some(wim_se),
        method: "coupled-draws",
    })
}

fn clouds(x: &EmpiricalMeasure, y: &EmpiricalMeasure, cfg: &WimConfig) -> Result<WimValue> {
    let p = cfg.order;
    let mut rng = child_stream(cfg.seed, &[3]);
    if x.dim() == 1 {
        let wim = wp_empirical_1d(p, x.as_slice(), y.as_slice())?;
        let (nx, ny) = (x.len(), y.len());
        if nx < 2 || ny < 2 {
            return Ok(WimValue {
                wim,
                wim_se: None,
                method: "empirical",
            });
        }
        let splits: Vec<f64> = (0..HALF_SPLITS)
            .map(|_| {
                let ix = rand::seq::index::sample(&mut rng, nx, nx / 2).into_vec();
                let iy = rand::seq::index::sample(&mut rng, ny, ny / 2).into_vec();
                wp_empirical_1d(p, x.select(&ix).as_slice(), y.select(&iy).as_slice())
            })
            .collect::<Result<_>>()?;
        Ok(WimValue {
            wim,
            wim_se: Some(sd(&splits)),
            method: "empirical",
        })
    } else if x.len() <= cfg.subsample && y.len() <= cfg.subsample {
        // Every subsample would be the whole cloud; one exact solve suffices.
        Ok(WimValue {
            wim: wp_empirical(p, x, y)?.0,
            wim_se: None,
            method: "simplex",
        })
    } else {
        let r = subsampled_wp(p, x, y, cfg.subsample, cfg.subsample_repeats, &mut rng)?;
        Ok(WimValue {
            wim: r.mean,
            wim_se: Some(r.sd / (r.repeats as f64).sqrt()),
            method: "subsampled-simplex",
        })
    }
}

/// Bounds for two conjugate posteriors of the same data.
///
/// The printed closed forms are used for the binomial model against a
/// uniform prior, the normal-variance model against the Jeffreys prior and
/// the Poisson model with gamma priors; other prior pairs with closed-form
/// log-density derivatives go through the Stein-kernel quadrature. Returns
/// `None` when neither applies.
pub fn conjugate_bounds(model: &BayesModel, prior1: &PriorSpec, prior2: &PriorSpec) -> Result<Option<BoundsReport>> {
    let n = model.data.len();
    let s: f64 = model.data.iter().sum();
    match &model.likelihood {
        Likelihood::PoissonIid => {
            let (Some((a1, b1)), Some((a2, b2))) = (prior1.gamma_kernel(), prior2.gamma_kernel()) else {
                return Ok(None);
            };
            let exact = poisson_gamma_exact(a1, b1, a2, b2, n as f64, s)?;
            if exact.proven {
                return Ok(Some(BoundsReport {
                    lower: exact.value,
                    upper: exact.value,
                    exact: Some(exact.value),
                    method: "poisson-gamma".into(),
                    warnings: Vec::new(),
                }));
            }
        }
        Likelihood::BinomialCount { trials } => {
            let total = n as u64 * trials;
            let x = s.round() as u64;
            let variant = |p: &PriorSpec| match p.beta_kernel() {
                Some((a, b)) if a == 0.5 && b == 0.5 => Some(BinomialVariant::JeffreysVsUniform),
                Some((a, b)) if a == 0.0 && b == 0.0 => Some(BinomialVariant::HaldaneVsUniform),
                Some((a, b)) if a == 1.0 && b == 1.0 => None,
                Some((alpha, beta)) => Some(BinomialVariant::BetaVsUniform { alpha, beta }),
                None => None,
            };
            let uniform = |p: &PriorSpec| p.beta_kernel() == Some((1.0, 1.0));
            let v = if uniform(prior1) {
                variant(prior2)
            } else if uniform(prior2) {
                variant(prior1)
            } else {
                None
            };
            if let Some(v) = v {
                return binomial_bounds(v, total, x).map(Some);
            }
            if uniform(prior1) && uniform(prior2) {
                return Ok(Some(identical_bounds()));
            }
        }
        Likelihood::NormalKnownMean { mean } => {
            let ss: f64 = model.data.iter().map(|x| (x - mean) * (x - mean)).sum();
            let jeffreys = |p: &PriorSpec| p.inverse_gamma_kernel() == Some((0.0, 0.0));
            let other = if jeffreys(prior1) {
                Some(prior2)
            } else if jeffreys(prior2) {
                Some(prior1)
            } else {
                None
            };
            if let Some((alpha, beta)) = other.and_then(|p| p.inverse_gamma_kernel()) {
                return normal_ig_bounds(alpha, beta, n as u64, ss).map(Some);
            }
        }
        _ => return Ok(None),
    }
    let post1 = conjugate_posterior(&model.with_prior(prior1.clone()))?;
    let ratio = match DensityRatio::from_priors(prior1, prior2, post1.support()) {
        Ok(r) => r,
        Err(WimError::Unsupported(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    let (lo, hi) = post1.effective_range()?;
    let ratio = [Monotonicity::Increasing, Monotonicity::Decreasing]
        .into_iter()
        .map(|m| ratio.clone().declare(m))
        .find(|r| r.verify_monotone((lo, hi)))
        .unwrap_or(ratio);
    theorem1_bounds(&post1, &ratio).map(Some)
}

fn identical_bounds() -> BoundsReport {
    BoundsReport {
        lower: 0.0,
        upper: 0.0,
        exact: Some(0.0),
        method: "identical".into(),
        warnings: Vec::new(),
    }
}

/// What [`assess`] computes besides the WIM.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssessOptions {
    pub wim: WimConfig,
    pub neutrality: bool,
    pub bounds: bool,
    /// MOPESS with prior 2 as the prior of interest and prior 1 as the base.
    pub mopess: Option<MopessConfig>,
}

impl Default for AssessOptions {
    fn default() -> Self {
        AssessOptions {
            wim: WimConfig::default(),
            neutrality: true,
            bounds: true,
            mopess: None,
        }
    }
}

/// Full report for a conjugate model under two priors.
pub fn assess(model: &BayesModel, prior1: &PriorSpec, prior2: &PriorSpec, opts: &AssessOptions) -> Result<ImpactReport> {
    let post1 = Posterior::Analytic(conjugate_posterior(&model.with_prior(prior1.clone()))?);
    let post2 = Posterior::Analytic(conjugate_posterior(&model.with_prior(prior2.clone()))?);
    let w = wim(&post1, &post2, &opts.wim)?;
    let neutrality = if opts.neutrality {
        let est = mle(model)?[0];
        Some([neutrality(&post1, est)?, neutrality(&post2, est)?])
    } else {
        None
    };
    let bounds = if opts.bounds && opts.wim.order == 1.0 {
        conjugate_bounds(model, prior1, prior2)?
    } else {
        None
    };
    let exact_gap = bounds.as_ref().and_then(|b| b.exact).map(|e| (w.wim - e).abs());
    let mopess = match &opts.mopess {
        Some(c) => Some(mopess(model, prior2, prior1, c)?),
        None => None,
    };
    Ok(ImpactReport {
        wim: w.wim,
        wim_se: w.wim_se,
        method: w.method,
        neutrality,
        mopess,
        bounds,
        exact_gap,
        config: opts.wim.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn gamma(a: f64, b: f64) -> Posterior {
        Posterior::Analytic(Distribution::gamma(a, b).unwrap())
    }

    #[test]
    fn identical_posteriors() {
        let p = gamma(3.0, 2.0);
        let cfg = WimConfig::default();
        assert_eq!(wim(&p, &p, &cfg).unwrap().wim, 0.0);
        let s = wim(&p, &p, &cfg.clone().sampled()).unwrap();
        assert_eq!(s.wim, 0.0);
        assert_eq!(s.wim_se, Some(0.0));
    }

    #[test]
    fn poisson_example_on_both_routes() {
        let (a, b) = (gamma(52.5, 12.5), gamma(53.5, 11.5));
        let exact = poisson_gamma_exact(2.5, 2.5, 3.5, 1.5, 10.0, 50.0).unwrap().value;
        let q = wim(&a, &b, &WimConfig::default()).unwrap();
        assert_relative_eq!(q.wim, exact, epsilon = 1e-6);
        assert_eq!(q.method, "quadrature");
        let s = wim(&a, &b, &WimConfig::default().with_seed(4).sampled()).unwrap();
        assert!((s.wim - exact).abs() < 0.01);
        assert!(s.wim_se.unwrap() > 0.0);
        let mut ind = WimConfig::default().with_seed(4).sampled();
        ind.coupling = Coupling::Independent;
        let i = wim(&a, &b, &ind).unwrap();
        assert!((i.wim - exact).abs() < 0.05);
        assert_eq!(i.method, "empirical");
    }

    #[test]
    fn symmetric_and_seeded() {
        let (a, b) = (gamma(5.0, 2.0), gamma(9.0, 3.0));
        let cfg = WimConfig::default();
        assert_eq!(wim(&a, &b, &cfg).unwrap().wim, wim(&b, &a, &cfg).unwrap().wim);
        let s = cfg.with_seed(9).sampled();
        assert_eq!(wim(&a, &b, &s).unwrap(), wim(&a, &b, &s).unwrap());
    }

    #[test]
    fn dimension_mismatch() {
        let cloud = EmpiricalMeasure::new(vec![0.0, 1.0, 2.0, 3.0], 2).unwrap();
        let s = Posterior::Sampled { cloud, diagnostics: None };
        let r = wim(&gamma(1.0, 1.0), &s, &WimConfig::default());
        assert!(matches!(r, Err(WimError::DimensionMismatch { left: 1, right: 2 })));
    }

    #[test]
    fn multivariate_clouds_use_the_simplex() {
        let a = EmpiricalMeasure::new(vec![0.0, 0.0, 1.0, 1.0, 2.0, 0.0], 2).unwrap();
        let b = EmpiricalMeasure::new(vec![0.0, 1.0, 1.0, 2.0, 2.0, 1.0], 2).unwrap();
        let pa = Posterior::Sampled { cloud: a, diagnostics: None };
        let pb = Posterior::Sampled { cloud: b, diagnostics: None };
        let w = wim(&pa, &pb, &WimConfig::default()).unwrap();
        assert_relative_eq!(w.wim, 1.0, epsilon = 1e-12);
        // Both clouds fit in one subsample, so a single exact solve is used.
        assert_eq!(w.wim_se, None);
        assert_eq!(w.method, "simplex");
    }

    #[test]
    fn assess_poisson() {
        let data = vec![5.0; 10];
        let model = BayesModel::new(Likelihood::PoissonIid, data, PriorSpec::Flat).unwrap();
        let p1 = PriorSpec::gamma(2.5, 2.5).unwrap();
        let p2 = PriorSpec::gamma(3.5, 1.5).unwrap();
        let r = assess(&model, &p1, &p2, &AssessOptions::default()).unwrap();
        let b = r.bounds.unwrap();
        assert_eq!(b.method, "poisson-gamma");
        assert!(r.exact_gap.unwrap() < 1e-6);
        let n = r.neutrality.unwrap();
        // Both priors pull the mean below the MLE of 5, the first one further.
        assert!(n[0].value > n[1].value && n[1].value > 0.5);
    }

    #[test]
    fn assess_binomial_and_normal() {
        let model = BayesModel::new(Likelihood::BinomialCount { trials: 10 }, vec![7.0], PriorSpec::Flat).unwrap();
        let r = assess(&model, &PriorSpec::Flat, &PriorSpec::beta(0.5, 0.5).unwrap(), &AssessOptions::default())
            .unwrap();
        let b = r.bounds.unwrap();
        assert_eq!(b.method, "binomial-jeffreys");
        assert!(b.lower <= r.wim && r.wim <= b.upper);

        let data = vec![1.0, -1.0, 2.0, -2.0, 0.5, -0.5, 1.5, -1.5, 0.3, 1.2];
        let model =
            BayesModel::new(Likelihood::NormalKnownMean { mean: 0.0 }, data, PriorSpec::JeffreysVariance).unwrap();
        let r = assess(
            &model,
            &PriorSpec::JeffreysVariance,
            &PriorSpec::inverse_gamma(1.0, 1.0).unwrap(),
            &AssessOptions::default(),
        )
        .unwrap();
        let b = r.bounds.unwrap();
        assert!(b.lower - 1e-9 <= r.wim && r.wim <= b.upper + 1e-9);
    }
}
