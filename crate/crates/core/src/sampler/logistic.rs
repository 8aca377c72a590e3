//! Logistic dose-response model and the LD50.

use serde::Serialize;

use super::{run_mcmc, McmcConfig, McmcDiagnostics};
use crate::distributions::Distribution;
use crate::error::{invalid, Result, WimError};
use crate::posterior::{softplus, Likelihood};
use crate::transport::EmpiricalMeasure;

/// Prior on `(β₀, β₁)` in standardised dose units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum LogisticPrior {
    /// Constant density on the plane.
    FlatPlane,
    /// Cauchy(0, 10) on the intercept and Cauchy(0, `slope_scale`) on the slope.
    Cauchy { slope_scale: f64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct LogisticFit {
    /// Draws of `(β₀, β₁)` on the standardised dose scale.
    pub joint: EmpiricalMeasure,
    /// LD50 draws on the original dose scale.
    pub ld50: EmpiricalMeasure,
    /// Draws dropped from the LD50 cloud because `|β₁| < 1e-12`.
    pub excluded: usize,
    /// Dose mean used for standardisation.
    pub center: f64,
    /// Twice the dose sample sd; standardised dose is `(x - center) / scale`.
    pub scale: f64,
    pub diagnostics: McmcDiagnostics,
}

fn check(doses: &[f64], trials: &[u64], successes: &[f64]) -> Result<()> {
    let l = Likelihood::LogisticDoseResponse {
        doses: doses.to_vec(),
        trials: trials.to_vec(),
    };
    l.check_data(successes)?;
    let first = doses.first().copied().unwrap_or(0.0);
    if doses.iter().all(|&d| d == first) {
        return Err(invalid("the logistic model needs at least two distinct doses"));
    }
    Ok(())
}

/// Mean and twice the sample sd (n - 1 divisor) of the doses.
pub fn standardisation(doses: &[f64]) -> (f64, f64) {
    let n = doses.len() as f64;
    let m = doses.iter().sum::<f64>() / n;
    let s = (doses.iter().map(|d| (d - m) * (d - m)).sum::<f64>() / (n - 1.0)).sqrt();
    (m, 2.0 * s)
}

fn ln_lik(z: &[f64], trials: &[u64], y: &[f64], b0: f64, b1: f64) -> f64 {
    z.iter()
        .zip(trials)
        .zip(y)
        .map(|((&x, &n), &k)| {
            let eta = b0 + b1 * x;
            -k * softplus(-eta) - (n as f64 - k) * softplus(eta)
        })
        .sum()
}

/// Maximum likelihood `(β₀, β₁)` for the doses as given, by Newton's method
/// with step halving (tolerance 1e-10, at most 200 iterations).
pub fn logistic_mle(doses: &[f64], trials: &[u64], successes: &[f64]) -> Result<[f64; 2]> {
    check(doses, trials, successes)?;
    let mut b = [0.0f64, 0.0];
    let mut ll = ln_lik(doses, trials, successes, b[0], b[1]);
    for _ in 0..200 {
        let (mut g0, mut g1, mut h00, mut h01, mut h11) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for ((&x, &n), &k) in doses.iter().zip(trials).zip(successes) {
            let p = 1.0 / (1.0 + (-(b[0] + b[1] * x)).exp());
            let r = k - n as f64 * p;
            let w = n as f64 * p * (1.0 - p);
            g0 += r;
            g1 += r * x;
            h00 += w;
            h01 += w * x;
            h11 += w * x * x;
        }
        let det = h00 * h11 - h01 * h01;
        if !(det > 0.0) || !det.is_finite() {
            return Err(WimError::MleDivergence("information matrix became singular (separated data?)".into()));
        }
        let d0 = (h11 * g0 - h01 * g1) / det;
        let d1 = (h00 * g1 - h01 * g0) / det;
        let mut step = 1.0;
        let mut next = [b[0] + d0, b[1] + d1];
        let mut ll_next = ln_lik(doses, trials, successes, next[0], next[1]);
        while ll_next < ll - 1e-12 && step > 1e-10 {
            step *= 0.5;
            next = [b[0] + step * d0, b[1] + step * d1];
            ll_next = ln_lik(doses, trials, successes, next[0], next[1]);
        }
        let change = (next[0] - b[0]).abs().max((next[1] - b[1]).abs());
        b = next;
        ll = ll_next;
        if b.iter().any(|v| !v.is_finite() || v.abs() > 1e8) {
            return Err(WimError::MleDivergence("coefficients grow without bound".into()));
        }
        if change < 1e-10 {
            return Ok(b);
        }
    }
    Err(WimError::MleDivergence("Newton iteration did not converge in 200 steps".into()))
}

/// Samples the posterior of `(β₀, β₁)` with doses standardised to mean 0 and
/// sd 1/2, and derives the LD50 `-β₀/β₁` on the original dose scale.
pub fn fit_logistic(
    doses: &[f64],
    trials: &[u64],
    successes: &[f64],
    prior: LogisticPrior,
    cfg: &McmcConfig,
) -> Result<LogisticFit> {
    check(doses, trials, successes)?;
    let (center, scale) = standardisation(doses);
    let z: Vec<f64> = doses.iter().map(|d| (d - center) / scale).collect();
    let (intercept, slope) = match prior {
        LogisticPrior::FlatPlane => (None, None),
        LogisticPrior::Cauchy { slope_scale } => (
            Some(Distribution::cauchy(0.0, 10.0)?),
            Some(Distribution::cauchy(0.0, slope_scale)?),
        ),
    };
    let target = |t: &[f64]| {
        let lp = intercept.map_or(0.0, |d| d.ln_pdf(t[0])) + slope.map_or(0.0, |d| d.ln_pdf(t[1]));
        lp + ln_lik(&z, trials, successes, t[0], t[1])
    };
    let mut cfg = cfg.clone();
    if cfg.initial_step.is_none() {
        cfg.initial_step = Some(vec![0.5, 1.0]);
    }
    let out = run_mcmc(target, &[0.0, 0.0], &cfg)?;
    let mut ld50 = Vec::with_capacity(out.draws.len());
    let mut excluded = 0;
    for i in 0..out.draws.len() {
        let p = out.draws.point(i);
        if p[1].abs() < 1e-12 {
            excluded += 1;
        } else {
            ld50.push(center + scale * (-p[0] / p[1]));
        }
    }
    Ok(LogisticFit {
        ld50: EmpiricalMeasure::from_1d(ld50)?,
        joint: out.draws,
        excluded,
        center,
        scale,
        diagnostics: out.diagnostics,
    })
}
