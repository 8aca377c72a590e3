//! Adaptive random-walk Metropolis and the non-conjugate model fits.
//!
//! Each coordinate gets its own Gaussian proposal. During burn-in the log
//! step size follows a Robbins–Monro recursion towards the target acceptance
//! rate; afterwards the steps are frozen so the retained draws come from a
//! fixed Metropolis kernel.

mod diagnostics;
mod logistic;
mod skew_normal;

pub use diagnostics::{effective_sample_size, split_rhat};
pub use logistic::{fit_logistic, logistic_mle, standardisation, LogisticFit, LogisticPrior};
pub use skew_normal::{fit_skew_normal, SkewNormalFit, SKEWNESS_BOUND};

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Result, WimError};
use crate::rng::child_stream;
use crate::transport::EmpiricalMeasure;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McmcConfig {
    pub chains: usize,
    /// Total iterations per chain, burn-in included.
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub target_acceptance: f64,
    pub seed: u64,
    /// Starting proposal sd per coordinate; `None` uses 1.
    pub initial_step: Option<Vec<f64>>,
    /// Sd of the Gaussian jitter added to the start of each chain.
    pub init_jitter: f64,
}

impl Default for McmcConfig {
    fn default() -> Self {
        McmcConfig {
            chains: 4,
            iterations: 20_000,
            burn_in: 10_000,
            thin: 5,
            target_acceptance: 0.3,
            seed: 0,
            initial_step: None,
            init_jitter: 0.1,
        }
    }
}

impl McmcConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn validate(&self, dim: usize) -> Result<()> {
        if self.chains == 0 {
            return Err(invalid("at least one chain is required"));
        }
        if self.burn_in >= self.iterations {
            return Err(invalid(format!(
                "burn-in ({}) must be shorter than the run ({})",
                self.burn_in, self.iterations
            )));
        }
        if self.thin == 0 {
            return Err(invalid("thinning must be at least 1"));
        }
        if !(self.target_acceptance > 0.0 && self.target_acceptance < 1.0) {
            return Err(invalid("target acceptance must lie in (0, 1)"));
        }
        if let Some(s) = &self.initial_step {
            if s.len() != dim || s.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                return Err(invalid("initial steps must be positive, one per coordinate"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McmcDiagnostics {
    /// Post-burn-in acceptance rate of each chain, averaged over coordinates.
    pub acceptance: Vec<f64>,
    /// Split R-hat per coordinate (NaN with a single chain and too few draws).
    pub rhat: Vec<f64>,
    /// Effective sample size per coordinate.
    pub ess: Vec<f64>,
    /// Final adapted step sizes of each chain.
    pub steps: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct McmcOutput {
    /// Retained draws of all chains, chain 0 first.
    pub draws: EmpiricalMeasure,
    pub diagnostics: McmcDiagnostics,
}

struct ChainResult {
    draws: Vec<Vec<f64>>,
    acceptance: f64,
    steps: Vec<f64>,
}

fn run_chain<F>(log_target: &F, init: &[f64], cfg: &McmcConfig, chain: usize) -> ChainResult
where
    F: Fn(&[f64]) -> f64,
{
    let d = init.len();
    let mut rng = child_stream(cfg.seed, &[chain as u64]);
    let mut x = init.to_vec();
    let mut lp = log_target(&x);
    if cfg.init_jitter > 0.0 {
        for _ in 0..100 {
            let cand: Vec<f64> = init
                .iter()
                .map(|v| v + cfg.init_jitter * rng.sample::<f64, _>(StandardNormal))
                .collect();
            let lc = log_target(&cand);
            if lc.is_finite() {
                x = cand;
                lp = lc;
                break;
            }
        }
    }
    let mut log_step: Vec<f64> = match &cfg.initial_step {
        Some(s) => s.iter().map(|v| v.ln()).collect(),
        None => vec![0.0; d],
    };
    let mut accepted = 0usize;
    let mut proposed = 0usize;
    let kept = (cfg.iterations - cfg.burn_in).div_ceil(cfg.thin);
    let mut draws = Vec::with_capacity(kept);
    for t in 0..cfg.iterations {
        let adapting = t < cfg.burn_in;
        let gain = 1.0 / ((t + 1) as f64).sqrt();
        for j in 0..d {
            let old = x[j];
            x[j] = old + log_step[j].exp() * rng.sample::<f64, _>(StandardNormal);
            let lq = log_target(&x);
            let u: f64 = rng.random();
            let accept = lq.is_finite() && u.ln() < lq - lp;
            if accept {
                lp = lq;
            } else {
                x[j] = old;
            }
            if adapting {
                let a = if accept { 1.0 } else { 0.0 };
                log_step[j] = (log_step[j] + gain * (a - cfg.target_acceptance)).clamp(-30.0, 30.0);
            } else {
                proposed += 1;
                accepted += accept as usize;
            }
        }
        if !adapting && (t - cfg.burn_in) % cfg.thin == 0 {
            draws.push(x.clone());
        }
    }
    ChainResult {
        draws,
        acceptance: accepted as f64 / proposed.max(1) as f64,
        steps: log_step.iter().map(|v| v.exp()).collect(),
    }
}

/// Runs `cfg.chains` adaptive Metropolis chains on `log_target` from `init`.
///
/// Fails with a precondition error when the target is not finite at `init`
/// and with [`WimError::SamplerFailure`] when every chain accepts fewer than
/// 1% of its post-burn-in proposals.
pub fn run_mcmc<F>(log_target: F, init: &[f64], cfg: &McmcConfig) -> Result<McmcOutput>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if init.is_empty() {
        return Err(invalid("initial point must have at least one coordinate"));
    }
    cfg.validate(init.len())?;
    let l0 = log_target(init);
    if !l0.is_finite() {
        return Err(WimError::Precondition(format!(
            "log target is not finite at the initial point ({l0})"
        )));
    }
    let chains: Vec<ChainResult> = (0..cfg.chains)
        .into_par_iter()
        .map(|c| run_chain(&log_target, init, cfg, c))
        .collect();
    let d = init.len();
    let acceptance: Vec<f64> = chains.iter().map(|c| c.acceptance).collect();
    let steps: Vec<Vec<f64>> = chains.iter().map(|c| c.steps.clone()).collect();
    let per_coord: Vec<Vec<Vec<f64>>> = (0..d)
        .map(|j| chains.iter().map(|c| c.draws.iter().map(|x| x[j]).collect()).collect())
        .collect();
    let rhat: Vec<f64> = per_coord.iter().map(|s| split_rhat(s)).collect();
    let ess: Vec<f64> = per_coord.iter().map(|s| effective_sample_size(s)).collect();
    let diagnostics = McmcDiagnostics { acceptance, rhat, ess, steps };
    if diagnostics.acceptance.iter().all(|&a| a < 0.01) {
        return Err(WimError::SamplerFailure(format!(
            "every chain is stuck (acceptance rates {:?})",
            diagnostics.acceptance
        )));
    }
    let flat: Vec<f64> = chains.into_iter().flat_map(|c| c.draws.into_iter().flatten()).collect();
    Ok(McmcOutput {
        draws: EmpiricalMeasure::new(flat, d)?,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn moments(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
        (m, v.sqrt())
    }

    #[test]
    fn standard_normal_target() {
        let cfg = McmcConfig {
            iterations: 20_000,
            burn_in: 5_000,
            thin: 2,
            seed: 17,
            ..McmcConfig::default()
        };
        let out = run_mcmc(|x| -0.5 * x[0] * x[0], &[0.0], &cfg).unwrap();
        let (m, s) = moments(out.draws.as_slice());
        assert!(m.abs() < 0.05, "mean {m}");
        assert!((s - 1.0).abs() < 0.05, "sd {s}");
        assert!(out.diagnostics.rhat[0] < 1.02);
        for a in &out.diagnostics.acceptance {
            assert!((a - 0.3).abs() < 0.1, "acceptance {a}");
        }
    }

    #[test]
    fn bad_start_and_config() {
        let cfg = McmcConfig::default();
        assert!(matches!(
            run_mcmc(|x| if x[0] > 0.0 { 0.0 } else { f64::NEG_INFINITY }, &[-1.0], &cfg),
            Err(WimError::Precondition(_))
        ));
        let bad = McmcConfig { burn_in: 10, iterations: 10, ..McmcConfig::default() };
        assert!(run_mcmc(|_| 0.0, &[0.0], &bad).is_err());
    }

    #[test]
    fn stuck_chains_are_reported() {
        let cfg = McmcConfig {
            iterations: 400,
            burn_in: 200,
            init_jitter: 0.0,
            ..McmcConfig::default()
        };
        // Only the exact starting point has finite density.
        let r = run_mcmc(|x| if x[0] == 0.5 { 0.0 } else { f64::NEG_INFINITY }, &[0.5], &cfg);
        assert!(matches!(r, Err(WimError::SamplerFailure(_))));
    }

    #[test]
    fn seeds_are_reproducible() {
        let cfg = McmcConfig { iterations: 2_000, burn_in: 1_000, seed: 5, ..McmcConfig::default() };
        let a = run_mcmc(|x| -0.5 * (x[0] * x[0] + x[1] * x[1]), &[0.0, 0.0], &cfg).unwrap();
        let b = run_mcmc(|x| -0.5 * (x[0] * x[0] + x[1] * x[1]), &[0.0, 0.0], &cfg).unwrap();
        assert_eq!(a.draws, b.draws);
    }
}
