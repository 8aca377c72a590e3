use rayon::prelude::*;
use serde::Serialize;

use crate::distributions::{Distribution, InverseCdf};
use crate::error::{invalid, Result, WimError};
use crate::numeric::summary::{mean, quantile_sorted, sd};
use crate::numeric::Tolerance;
use crate::posterior::{conjugate_posterior, posterior_predictive_sample, BayesModel, Likelihood, PriorSpec};
use crate::rng::child_stream;
use crate::transport::wp_tables;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MopessConfig {
    /// Largest number of extra observations tried; `None` means twice the
    /// sample size.
    pub horizon: Option<usize>,
    pub reps: usize,
    pub seed: u64,
}

impl Default for MopessConfig {
    fn default() -> Self {
        MopessConfig {
            horizon: None,
            reps: 100,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MopessReport {
    /// Mean of the signed OPESS draws; positive when the prior of interest
    /// carries more information than the baseline prior.
    pub mopess: f64,
    /// Monte Carlo standard error of `mopess`.
    pub se: f64,
    pub opess_draws: Vec<i64>,
    /// 5% and 95% quantiles of the OPESS draws.
    pub quantile_band: (f64, f64),
    pub horizon: usize,
    pub reps: usize,
}

const TABLE_TOL: f64 = 1e-10;
const W2_TOL: Tolerance = Tolerance {
    abs: 1e-12,
    rel: 1e-8,
    max_intervals: 4000,
};

/// Rewrites binomial counts as single Bernoulli trials so that augmentation
/// works one trial at a time.
fn per_trial(model: &BayesModel) -> BayesModel {
    match &model.likelihood {
        Likelihood::BinomialCount { trials } if *trials != 1 => {
            let mut data = Vec::with_capacity(model.data.len() * *trials as usize);
            for &c in &model.data {
                let k = c.round() as u64;
                data.extend(std::iter::repeat_n(1.0, k as usize));
                data.extend(std::iter::repeat_n(0.0, (*trials - k) as usize));
            }
            BayesModel {
                likelihood: Likelihood::BinomialCount { trials: 1 },
                data,
                prior: model.prior.clone(),
            }
        }
        _ => model.clone(),
    }
}

fn w2(a: &InverseCdf, b: &InverseCdf) -> Result<f64> {
    Ok(wp_tables(2.0, a, b, W2_TOL)?.value)
}

fn posterior(model: &BayesModel, rep: usize) -> Result<Distribution> {
    conjugate_posterior(model).map_err(|e| match e {
        WimError::ImproperPosterior(m) => WimError::ImproperPosterior(format!("replicate {rep}: {m}")),
        other => other,
    })
}

/// One OPESS draw.
fn opess(model: &BayesModel, interest: &PriorSpec, base: &PriorSpec, horizon: usize, seed: u64, rep: usize) -> Result<i64> {
    let mi = model.with_prior(interest.clone());
    let mb = model.with_prior(base.clone());
    let pi = posterior(&mi, rep)?;
    let ti = InverseCdf::with_tolerance(&pi, TABLE_TOL)?;
    let tb = InverseCdf::with_tolerance(&posterior(&mb, rep)?, TABLE_TOL)?;
    let mut rng = child_stream(seed, &[rep as u64]);
    let y1 = posterior_predictive_sample(&pi, &model.likelihood, horizon, &mut rng)?;
    let y2 = posterior_predictive_sample(&pi, &model.likelihood, horizon, &mut rng)?;
    let mut best = (f64::INFINITY, 0i64);
    for m in 1..=horizon {
        let d1 = w2(&ti, &InverseCdf::with_tolerance(&posterior(&mb.with_extra_data(&y1[..m]), rep)?, TABLE_TOL)?)?;
        let d2 = w2(&tb, &InverseCdf::with_tolerance(&posterior(&mi.with_extra_data(&y2[..m]), rep)?, TABLE_TOL)?)?;
        // Strict comparisons keep the smaller |m| on ties, and +m before -m.
        if d1 < best.0 {
            best = (d1, m as i64);
        }
        if d2 < best.0 {
            best = (d2, -(m as i64));
        }
    }
    if !best.0.is_finite() {
        return Err(WimError::Divergence(format!("replicate {rep}: no finite distance")));
    }
    Ok(best.1)
}

/// Mean observed prior effective sample size of `interest` relative to `base`.
///
/// Each replicate draws two independent streams of `horizon` predictive
/// observations from the posterior under `interest`. For each `m` it measures
/// the W₂ distance between the interest posterior and the base posterior fed
/// `m` extra observations of the first stream (candidate `+m`), and between
/// the base posterior and the interest posterior fed `m` extra observations
/// of the second stream (candidate `-m`). The OPESS is the candidate with the
/// smallest distance.
pub fn mopess(model: &BayesModel, interest: &PriorSpec, base: &PriorSpec, cfg: &MopessConfig) -> Result<MopessReport> {
    if cfg.reps == 0 {
        return Err(invalid("MOPESS needs at least one replicate"));
    }
    let unit = per_trial(model);
    if !matches!(
        unit.likelihood,
        Likelihood::PoissonIid | Likelihood::BinomialCount { .. } | Likelihood::NormalKnownMean { .. }
    ) {
        return Err(WimError::Unsupported(format!(
            "MOPESS needs a conjugate model, got {}",
            model.likelihood.name()
        )));
    }
    let horizon = cfg.horizon.unwrap_or(2 * unit.data.len());
    if horizon == 0 {
        return Err(invalid("MOPESS horizon must be at least 1"));
    }
    let draws: Vec<i64> = (0..cfg.reps)
        .into_par_iter()
        .map(|r| opess(&unit, interest, base, horizon, cfg.seed, r))
        .collect::<Result<_>>()?;
    let values: Vec<f64> = draws.iter().map(|&d| d as f64).collect();
    let mut sorted = values.clone();
    sorted.sort_by(f64::total_cmp);
    Ok(MopessReport {
        mopess: mean(&values),
        se: sd(&values) / (values.len() as f64).sqrt(),
        quantile_band: (quantile_sorted(&sorted, 0.05), quantile_sorted(&sorted, 0.95)),
        opess_draws: draws,
        horizon,
        reps: cfg.reps,
    })
}
