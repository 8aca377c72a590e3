//! Skew-normal model with a prior on the skewness.

use serde::Serialize;

use super::{run_mcmc, McmcConfig, McmcDiagnostics};
use crate::distributions::Distribution;
use crate::error::{invalid, Result};
use crate::posterior::{Likelihood, PriorSpec};
use crate::transport::EmpiricalMeasure;

/// A flat skewness prior is restricted to `|α| <= SKEWNESS_BOUND`.
///
/// The skew-normal likelihood tends to a positive constant as `|α|` grows,
/// so a flat prior on the whole line leaves the posterior improper. At
/// `|α| = 30` the density is already indistinguishable from a half-normal.
pub const SKEWNESS_BOUND: f64 = 30.0;

#[derive(Debug, Clone, Serialize)]
pub struct SkewNormalFit {
    /// Draws of `(ξ, ω, α)`.
    pub joint: EmpiricalMeasure,
    pub diagnostics: McmcDiagnostics,
}

impl SkewNormalFit {
    /// Marginal draws of the skewness α.
    pub fn skewness(&self) -> EmpiricalMeasure {
        self.joint.marginal(2).expect("joint cloud has three coordinates")
    }
}

/// Samples `(ξ, log ω, α)` with flat priors on ξ and log ω and
/// `skewness_prior` on α; returns draws of `(ξ, ω, α)`.
pub fn fit_skew_normal(data: &[f64], skewness_prior: &PriorSpec, cfg: &McmcConfig) -> Result<SkewNormalFit> {
    if data.len() < 3 {
        return Err(invalid("the skew-normal fit needs at least three observations"));
    }
    Likelihood::SkewNormalFull.check_data(data)?;
    let prior = match skewness_prior {
        PriorSpec::Flat | PriorSpec::FlatPlane => {
            PriorSpec::Proper(Distribution::uniform(-SKEWNESS_BOUND, SKEWNESS_BOUND)?)
        }
        p => p.clone(),
    };
    let n = data.len() as f64;
    let mean = data.iter().sum::<f64>() / n;
    let sd = (data.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)).sqrt();
    if sd <= 0.0 {
        return Err(invalid("the skew-normal fit needs data with positive spread"));
    }
    let lik = Likelihood::SkewNormalFull;
    let target = |t: &[f64]| {
        let lp = prior.ln_density_1d(t[2]);
        if lp == f64::NEG_INFINITY || !t[1].is_finite() {
            return f64::NEG_INFINITY;
        }
        lp + lik.ln_likelihood(data, &[t[0], t[1].exp(), t[2]])
    };
    let mut cfg = cfg.clone();
    if cfg.initial_step.is_none() {
        cfg.initial_step = Some(vec![0.2 * sd, 0.2, 1.0]);
    }
    let out = run_mcmc(target, &[mean, sd.ln(), 0.0], &cfg)?;
    let mut pts = out.draws.as_slice().to_vec();
    for row in pts.chunks_mut(3) {
        row[1] = row[1].exp();
    }
    Ok(SkewNormalFit {
        joint: EmpiricalMeasure::new(pts, 3)?,
        diagnostics: out.diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn too_little_data() {
        let cfg = McmcConfig::default();
        assert!(fit_skew_normal(&[1.0, 2.0], &PriorSpec::Flat, &cfg).is_err());
        assert!(fit_skew_normal(&[1.0, 1.0, 1.0], &PriorSpec::Flat, &cfg).is_err());
    }

    #[test]
    fn flat_prior_stays_inside_the_bound() {
        let data = Distribution::skew_normal(0.0, 1.0, 5.0)
            .unwrap()
            .sample(&mut crate::rng::stream(4), 30);
        let cfg = McmcConfig { chains: 2, iterations: 3_000, burn_in: 1_500, seed: 1, ..McmcConfig::default() };
        let fit = fit_skew_normal(&data, &PriorSpec::Flat, &cfg).unwrap();
        assert!(fit.skewness().as_slice().iter().all(|a| a.abs() <= SKEWNESS_BOUND));
        assert!(fit.joint.coordinate(1).unwrap().iter().all(|w| *w > 0.0));
    }
}
