use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{wim, WimConfig};
use crate::error::{invalid, Result, WimError};
use crate::numeric::summary::{quantile_sorted, sorted};
use crate::posterior::{conjugate_posterior, BayesModel, Posterior, PriorSpec};
use crate::rng::{child_seed, child_stream};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootstrapConfig {
    pub resamples: usize,
    pub seed: u64,
    /// Use the original data as resample 0.
    pub include_identity: bool,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            resamples: 250,
            seed: 0,
            include_identity: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootstrapReport {
    /// WIM of every usable resample, in resample order.
    pub values: Vec<f64>,
    /// Resamples dropped because a posterior was improper.
    pub excluded: usize,
    pub median: f64,
    /// 2.5% and 97.5% quantiles.
    pub interval95: (f64, f64),
    /// 25% and 75% quantiles.
    pub quartiles: (f64, f64),
}

impl BootstrapReport {
    /// Summary of already computed resample values; fails when empty.
    pub fn from_values(values: Vec<f64>, excluded: usize) -> Result<Self> {
        if values.is_empty() {
            return Err(WimError::ImproperPosterior(format!(
                "all {excluded} bootstrap resamples gave an improper posterior"
            )));
        }
        let s = sorted(&values);
        Ok(BootstrapReport {
            median: quantile_sorted(&s, 0.5),
            interval95: (quantile_sorted(&s, 0.025), quantile_sorted(&s, 0.975)),
            quartiles: (quantile_sorted(&s, 0.25), quantile_sorted(&s, 0.75)),
            values,
            excluded,
        })
    }

    pub fn iqr(&self) -> f64 {
        self.quartiles.1 - self.quartiles.0
    }
}

/// Nonparametric bootstrap of any statistic of the data.
///
/// `statistic` gets a resample and a seed for its own randomness. Resamples on
/// which it fails with [`WimError::ImproperPosterior`] are counted and
/// skipped; other errors abort.
pub fn bootstrap_wim_with<T, F>(data: &[T], cfg: &BootstrapConfig, statistic: F) -> Result<BootstrapReport>
where
    T: Clone + Send + Sync,
    F: Fn(&[T], u64) -> Result<f64> + Sync,
{
    if cfg.resamples == 0 {
        return Err(invalid("bootstrap needs at least one resample"));
    }
    if data.len() < 2 {
        return Err(invalid("bootstrap needs at least two observations"));
    }
    let n = data.len();
    let outcomes: Vec<Option<f64>> = (0..cfg.resamples)
        .into_par_iter()
        .map(|b| {
            let resample: Vec<T> = resample_indices(n, b, cfg).into_iter().map(|i| data[i].clone()).collect();
            match statistic(&resample, child_seed(cfg.seed, &[b as u64, 1])) {
                Ok(v) => Ok(Some(v)),
                Err(WimError::ImproperPosterior(_)) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;
    let values: Vec<f64> = outcomes.iter().flatten().copied().collect();
    let excluded = outcomes.len() - values.len();
    BootstrapReport::from_values(values, excluded)
}

/// Indices of bootstrap resample `b` of `n` observations; resample 0 is the
/// identity when `cfg.include_identity` is set.
pub fn resample_indices(n: usize, b: usize, cfg: &BootstrapConfig) -> Vec<usize> {
    if b == 0 && cfg.include_identity {
        return (0..n).collect();
    }
    let mut rng = child_stream(cfg.seed, &[b as u64, 0]);
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

/// Bootstrap of the WIM between the conjugate posteriors of `model` under
/// two priors.
pub fn bootstrap_wim(
    model: &BayesModel,
    prior1: &PriorSpec,
    prior2: &PriorSpec,
    cfg: &BootstrapConfig,
    wim_cfg: &WimConfig,
) -> Result<BootstrapReport> {
    bootstrap_wim_with(&model.data, cfg, |resample, seed| {
        let m = BayesModel::new(model.likelihood.clone(), resample.to_vec(), model.prior.clone())?;
        let p1 = Posterior::Analytic(conjugate_posterior(&m.with_prior(prior1.clone()))?);
        let p2 = Posterior::Analytic(conjugate_posterior(&m.with_prior(prior2.clone()))?);
        Ok(wim(&p1, &p2, &wim_cfg.clone().with_seed(seed))?.wim)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::posterior::Likelihood;

    fn model() -> BayesModel {
        let data = vec![3.0, 7.0, 4.0, 6.0, 5.0, 2.0, 8.0, 5.0, 4.0, 6.0];
        BayesModel::new(Likelihood::PoissonIid, data, PriorSpec::Flat).unwrap()
    }

    #[test]
    fn identity_resample_reproduces_the_point_estimate() {
        let (p1, p2) = (PriorSpec::gamma(2.5, 2.5).unwrap(), PriorSpec::gamma(3.5, 1.5).unwrap());
        let cfg = BootstrapConfig {
            resamples: 1,
            seed: 0,
            include_identity: true,
        };
        let r = bootstrap_wim(&model(), &p1, &p2, &cfg, &WimConfig::default()).unwrap();
        let post = |p: &PriorSpec| Posterior::Analytic(conjugate_posterior(&model().with_prior(p.clone())).unwrap());
        let point = wim(&post(&p1), &post(&p2), &WimConfig::default()).unwrap().wim;
        assert_eq!(r.values, vec![point]);
    }

    #[test]
    fn identical_priors_give_zeros() {
        let p = PriorSpec::gamma(2.0, 1.0).unwrap();
        let cfg = BootstrapConfig {
            resamples: 20,
            seed: 4,
            include_identity: false,
        };
        let r = bootstrap_wim(&model(), &p, &p, &cfg, &WimConfig::default()).unwrap();
        assert!(r.values.iter().all(|&v| v == 0.0));
        assert_eq!(r.values.len(), 20);
        assert_eq!(r, bootstrap_wim(&model(), &p, &p, &cfg, &WimConfig::default()).unwrap());
    }

    #[test]
    fn improper_resamples_are_excluded() {
        let m = BayesModel::new(Likelihood::BinomialCount { trials: 1 }, vec![0.0, 0.0, 0.0, 1.0], PriorSpec::Flat)
            .unwrap();
        let haldane = PriorSpec::beta(0.0, 0.0).unwrap();
        let cfg = BootstrapConfig {
            resamples: 60,
            seed: 2,
            include_identity: false,
        };
        let r = bootstrap_wim(&m, &PriorSpec::Flat, &haldane, &cfg, &WimConfig::default()).unwrap();
        assert!(r.excluded > 0);
        assert_eq!(r.values.len() + r.excluded, 60);
        assert!(r.quartiles.0 <= r.median && r.median <= r.quartiles.1);
    }
}
