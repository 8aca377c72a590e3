//! Bayesian models, priors and conjugate posteriors.

use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::distributions::Distribution;
use crate::error::{invalid, Result, WimError};
use crate::numeric::special::{ln_norm_cdf, ln_norm_pdf};
use crate::sampler::McmcDiagnostics;
use crate::transport::EmpiricalMeasure;

/// User-supplied log prior density (up to a constant).
#[derive(Clone)]
pub struct CustomPrior {
    pub name: String,
    pub ln_density: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
}

impl fmt::Debug for CustomPrior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomPrior").field("name", &self.name).finish()
    }
}

/// A prior, proper or improper.
///
/// The improper kernels are the formal densities
/// `θ^(a-1) e^(-bθ)` (gamma), `θ^(a-1) (1-θ)^(b-1)` (beta) and
/// `s^(-a-1) e^(-b/s)` (inverse gamma) with parameters allowed on the
/// boundary of the proper range. `Flat` means a constant density in the
/// model's natural parameter; `JeffreysVariance` is `1/σ²`; `FlatPlane` is a
/// constant density over all coordinates of a multivariate parameter.
#[derive(Debug, Clone)]
pub enum PriorSpec {
    Proper(Distribution),
    ImproperGamma { shape: f64, rate: f64 },
    ImproperBeta { alpha: f64, beta: f64 },
    ImproperInverseGamma { shape: f64, scale: f64 },
    Flat,
    JeffreysVariance,
    FlatPlane,
    Custom(CustomPrior),
}

impl PartialEq for PriorSpec {
    fn eq(&self, other: &Self) -> bool {
        use PriorSpec::*;
        match (self, other) {
            (Proper(a), Proper(b)) => a == b,
            (ImproperGamma { shape: a, rate: b }, ImproperGamma { shape: c, rate: d }) => a == c && b == d,
            (ImproperBeta { alpha: a, beta: b }, ImproperBeta { alpha: c, beta: d }) => a == c && b == d,
            (ImproperInverseGamma { shape: a, scale: b }, ImproperInverseGamma { shape: c, scale: d }) => {
                a == c && b == d
            }
            (Flat, Flat) | (JeffreysVariance, JeffreysVariance) | (FlatPlane, FlatPlane) => true,
            (Custom(a), Custom(b)) => Arc::ptr_eq(&a.ln_density, &b.ln_density),
            _ => false,
        }
    }
}

impl PriorSpec {
    /// Gamma-kernel prior, proper when both parameters are positive.
    pub fn gamma(shape: f64, rate: f64) -> Result<Self> {
        if !(shape.is_finite() && rate.is_finite()) || shape < 0.0 || rate < 0.0 {
            return Err(invalid(format!("gamma prior needs shape >= 0 and rate >= 0, got ({shape}, {rate})")));
        }
        if shape > 0.0 && rate > 0.0 {
            Ok(PriorSpec::Proper(Distribution::gamma(shape, rate)?))
        } else {
            Ok(PriorSpec::ImproperGamma { shape, rate })
        }
    }

    /// Beta-kernel prior; `beta(0, 0)` is the Haldane prior.
    pub fn beta(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite()) || alpha < 0.0 || beta < 0.0 {
            return Err(invalid(format!("beta prior needs alpha >= 0 and beta >= 0, got ({alpha}, {beta})")));
        }
        if alpha > 0.0 && beta > 0.0 {
            Ok(PriorSpec::Proper(Distribution::beta(alpha, beta)?))
        } else {
            Ok(PriorSpec::ImproperBeta { alpha, beta })
        }
    }

    /// Inverse-gamma-kernel prior on a variance. Shape may go down to -1
    /// (`shape = -1, scale = 0` is flat in σ²).
    pub fn inverse_gamma(shape: f64, scale: f64) -> Result<Self> {
        if !(shape.is_finite() && scale.is_finite()) || shape < -1.0 || scale < 0.0 {
            return Err(invalid(format!(
                "inverse-gamma prior needs shape >= -1 and scale >= 0, got ({shape}, {scale})"
            )));
        }
        if shape > 0.0 && scale > 0.0 {
            Ok(PriorSpec::Proper(Distribution::inverse_gamma(shape, scale)?))
        } else {
            Ok(PriorSpec::ImproperInverseGamma { shape, scale })
        }
    }

    pub fn is_proper(&self) -> bool {
        matches!(self, PriorSpec::Proper(_))
    }

    /// Short text form, e.g. `gamma:2.5:2.5` or `flat`.
    pub fn label(&self) -> String {
        match self {
            PriorSpec::Proper(d) => {
                let name = match d.family() {
                    crate::distributions::Family::Gamma => "gamma",
                    crate::distributions::Family::Beta => "beta",
                    crate::distributions::Family::Normal => "normal",
                    crate::distributions::Family::InverseGamma => "ig",
                    crate::distributions::Family::StudentT => "t",
                    crate::distributions::Family::SkewNormal => "skewnormal",
                    crate::distributions::Family::Cauchy => "cauchy",
                    crate::distributions::Family::Poisson => "poisson",
                    crate::distributions::Family::Binomial => "binomial",
                    crate::distributions::Family::UniformInterval => "uniform",
                };
                let params: Vec<String> = d.params().iter().map(|p| format!("{p}")).collect();
                format!("{name}:{}", params.join(":"))
            }
            PriorSpec::ImproperGamma { shape, rate } => format!("gamma:{shape}:{rate}"),
            PriorSpec::ImproperBeta { alpha, beta } => format!("beta:{alpha}:{beta}"),
            PriorSpec::ImproperInverseGamma { shape, scale } => format!("ig:{shape}:{scale}"),
            PriorSpec::Flat => "flat".into(),
            PriorSpec::JeffreysVariance => "jeffreys-var".into(),
            PriorSpec::FlatPlane => "flat-plane".into(),
            PriorSpec::Custom(c) => c.name.clone(),
        }
    }

    /// Log prior density up to a constant at a scalar parameter.
    pub fn ln_density_1d(&self, t: f64) -> f64 {
        match self {
            PriorSpec::Proper(d) => d.ln_pdf(t),
            PriorSpec::ImproperGamma { shape, rate } => {
                if t <= 0.0 {
                    f64::NEG_INFINITY
                } else {
                    (shape - 1.0) * t.ln() - rate * t
                }
            }
            PriorSpec::ImproperBeta { alpha, beta } => {
                if t <= 0.0 || t >= 1.0 {
                    f64::NEG_INFINITY
                } else {
                    (alpha - 1.0) * t.ln() + (beta - 1.0) * (-t).ln_1p()
                }
            }
            PriorSpec::ImproperInverseGamma { shape, scale } => {
                if t <= 0.0 {
                    f64::NEG_INFINITY
                } else {
                    -(shape + 1.0) * t.ln() - scale / t
                }
            }
            PriorSpec::Flat | PriorSpec::FlatPlane => 0.0,
            PriorSpec::JeffreysVariance => {
                if t <= 0.0 {
                    f64::NEG_INFINITY
                } else {
                    -t.ln()
                }
            }
            PriorSpec::Custom(c) => (c.ln_density)(&[t]),
        }
    }

    /// Derivative of the log prior density at a scalar parameter, when known
    /// in closed form.
    pub fn d_ln_density_1d(&self, t: f64) -> Option<f64> {
        Some(match self {
            PriorSpec::Proper(d) => match *d {
                Distribution::Gamma { shape, rate } => (shape - 1.0) / t - rate,
                Distribution::Beta { alpha, beta } => (alpha - 1.0) / t - (beta - 1.0) / (1.0 - t),
                Distribution::Normal { mean, sd } => -(t - mean) / (sd * sd),
                Distribution::InverseGamma { shape, scale } => -(shape + 1.0) / t + scale / (t * t),
                Distribution::StudentT { location, scale, dof } => {
                    let z = (t - location) / scale;
                    -(dof + 1.0) * z / (scale * (dof + z * z))
                }
                Distribution::Cauchy { location, scale } => {
                    let z = (t - location) / scale;
                    -2.0 * z / (scale * (1.0 + z * z))
                }
                Distribution::SkewNormal { location, scale, shape } => {
                    let z = (t - location) / scale;
                    let mills = (ln_norm_pdf(shape * z) - ln_norm_cdf(shape * z)).exp();
                    (-z + shape * mills) / scale
                }
                Distribution::Uniform { .. } => 0.0,
                Distribution::Poisson { .. } | Distribution::Binomial { .. } => return None,
            },
            PriorSpec::ImproperGamma { shape, rate } => (shape - 1.0) / t - rate,
            PriorSpec::ImproperBeta { alpha, beta } => (alpha - 1.0) / t - (beta - 1.0) / (1.0 - t),
            PriorSpec::ImproperInverseGamma { shape, scale } => -(shape + 1.0) / t + scale / (t * t),
            PriorSpec::Flat | PriorSpec::FlatPlane => 0.0,
            PriorSpec::JeffreysVariance => -1.0 / t,
            PriorSpec::Custom(_) => return None,
        })
    }

    /// `(α, β)` of a prior proportional to `θ^(α-1) e^(-βθ)`.
    pub fn gamma_kernel(&self) -> Option<(f64, f64)> {
        match *self {
            PriorSpec::Proper(Distribution::Gamma { shape, rate }) => Some((shape, rate)),
            PriorSpec::ImproperGamma { shape, rate } => Some((shape, rate)),
            PriorSpec::Flat => Some((1.0, 0.0)),
            _ => None,
        }
    }

    /// `(α, β)` of a prior proportional to `θ^(α-1) (1-θ)^(β-1)`.
    pub fn beta_kernel(&self) -> Option<(f64, f64)> {
        match *self {
            PriorSpec::Proper(Distribution::Beta { alpha, beta }) => Some((alpha, beta)),
            PriorSpec::Proper(Distribution::Uniform { lo, hi }) if lo == 0.0 && hi == 1.0 => Some((1.0, 1.0)),
            PriorSpec::ImproperBeta { alpha, beta } => Some((alpha, beta)),
            PriorSpec::Flat => Some((1.0, 1.0)),
            _ => None,
        }
    }

    /// `(α, β)` of a prior proportional to `θ^(-α-1) e^(-β/θ)`.
    pub fn inverse_gamma_kernel(&self) -> Option<(f64, f64)> {
        match *self {
            PriorSpec::Proper(Distribution::InverseGamma { shape, scale }) => Some((shape, scale)),
            PriorSpec::ImproperInverseGamma { shape, scale } => Some((shape, scale)),
            PriorSpec::JeffreysVariance => Some((0.0, 0.0)),
            PriorSpec::Flat => Some((-1.0, 0.0)),
            _ => None,
        }
    }
}

/// Sampling model of the observations.
#[derive(Debug, Clone, PartialEq)]
pub enum Likelihood {
    /// Counts `x_i ~ Poisson(θ)`.
    PoissonIid,
    /// Counts `x_i ~ Binomial(trials, θ)`; `trials = 1` gives Bernoulli data.
    BinomialCount { trials: u64 },
    /// `x_i ~ N(mean, σ²)` with known mean; the parameter is σ².
    NormalKnownMean { mean: f64 },
    /// `x_i ~ SN(ξ, ω, α)`; parameter `(ξ, ω, α)`. The prior applies to α,
    /// with a flat prior on ξ and `1/ω` on ω.
    SkewNormalFull,
    /// `y_i ~ Binomial(trials_i, logit⁻¹(β₀ + β₁ dose_i))`; parameter `(β₀, β₁)`.
    /// A proper prior is the slope prior, combined with Cauchy(0, 10) on the
    /// intercept; `FlatPlane` is flat on both.
    LogisticDoseResponse { doses: Vec<f64>, trials: Vec<u64> },
}

impl Likelihood {
    pub fn dim(&self) -> usize {
        match self {
            Likelihood::SkewNormalFull => 3,
            Likelihood::LogisticDoseResponse { .. } => 2,
            _ => 1,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Likelihood::PoissonIid => "poisson",
            Likelihood::BinomialCount { .. } => "binomial",
            Likelihood::NormalKnownMean { .. } => "normal",
            Likelihood::SkewNormalFull => "skew-normal",
            Likelihood::LogisticDoseResponse { .. } => "logistic",
        }
    }

    /// Checks that `data` can come from this model.
    pub fn check_data(&self, data: &[f64]) -> Result<()> {
        if data.iter().any(|x| !x.is_finite()) {
            return Err(invalid("observations must be finite"));
        }
        match self {
            Likelihood::PoissonIid => {
                if data.iter().any(|&x| x < 0.0 || x.fract() != 0.0) {
                    return Err(invalid("poisson observations must be non-negative integers"));
                }
            }
            Likelihood::BinomialCount { trials } => {
                if *trials == 0 {
                    return Err(invalid("binomial trials must be positive"));
                }
                if data.iter().any(|&x| x < 0.0 || x.fract() != 0.0 || x > *trials as f64) {
                    return Err(invalid(format!("binomial observations must be integers in [0, {trials}]")));
                }
            }
            Likelihood::NormalKnownMean { mean } => {
                if !mean.is_finite() {
                    return Err(invalid("normal mean must be finite"));
                }
            }
            Likelihood::SkewNormalFull => {}
            Likelihood::LogisticDoseResponse { doses, trials } => {
                if doses.len() != trials.len() || doses.len() != data.len() {
                    return Err(invalid("doses, trials and successes must have the same length"));
                }
                if doses.iter().any(|d| !d.is_finite()) {
                    return Err(invalid("doses must be finite"));
                }
                if data
                    .iter()
                    .zip(trials)
                    .any(|(&y, &n)| y < 0.0 || y.fract() != 0.0 || y > n as f64)
                {
                    return Err(invalid("successes must be integers between 0 and their trial count"));
                }
            }
        }
        Ok(())
    }

    /// Log likelihood of `data` at `theta`.
    pub fn ln_likelihood(&self, data: &[f64], theta: &[f64]) -> f64 {
        match self {
            Likelihood::PoissonIid => {
                let t = theta[0];
                if t <= 0.0 {
                    return if t == 0.0 && data.iter().all(|&x| x == 0.0) { 0.0 } else { f64::NEG_INFINITY };
                }
                let s: f64 = data.iter().sum();
                s * t.ln() - data.len() as f64 * t
            }
            Likelihood::BinomialCount { trials } => {
                let t = theta[0];
                if !(0.0..=1.0).contains(&t) {
                    return f64::NEG_INFINITY;
                }
                let s: f64 = data.iter().sum();
                let f = data.len() as f64 * *trials as f64 - s;
                let a = if s == 0.0 { 0.0 } else { s * t.ln() };
                let b = if f == 0.0 { 0.0 } else { f * (-t).ln_1p() };
                a + b
            }
            Likelihood::NormalKnownMean { mean } => {
                let v = theta[0];
                if v <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                let ss: f64 = data.iter().map(|x| (x - mean) * (x - mean)).sum();
                -0.5 * data.len() as f64 * v.ln() - 0.5 * ss / v
            }
            Likelihood::SkewNormalFull => {
                let (xi, omega, alpha) = (theta[0], theta[1], theta[2]);
                if omega <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                data.iter()
                    .map(|&x| {
                        let z = (x - xi) / omega;
                        ln_norm_pdf(z) + ln_norm_cdf(alpha * z)
                    })
                    .sum::<f64>()
                    - data.len() as f64 * omega.ln()
            }
            Likelihood::LogisticDoseResponse { doses, trials } => doses
                .iter()
                .zip(trials)
                .zip(data)
                .map(|((&d, &n), &y)| {
                    let eta = theta[0] + theta[1] * d;
                    // log p = -log(1+e^-η), log(1-p) = -log(1+e^η)
                    -y * softplus(-eta) - (n as f64 - y) * softplus(eta)
                })
                .sum(),
        }
    }
}

/// `log(1 + e^x)` without overflow.
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Likelihood, observations and prior.
#[derive(Debug, Clone)]
pub struct BayesModel {
    pub likelihood: Likelihood,
    pub data: Vec<f64>,
    pub prior: PriorSpec,
}

impl BayesModel {
    pub fn new(likelihood: Likelihood, data: Vec<f64>, prior: PriorSpec) -> Result<Self> {
        likelihood.check_data(&data)?;
        Ok(BayesModel { likelihood, data, prior })
    }

    /// Same likelihood and data under a different prior.
    pub fn with_prior(&self, prior: PriorSpec) -> Self {
        BayesModel { prior, ..self.clone() }
    }

    /// Same likelihood and prior with extra observations appended.
    pub fn with_extra_data(&self, extra: &[f64]) -> Self {
        let mut data = self.data.clone();
        data.extend_from_slice(extra);
        BayesModel { data, ..self.clone() }
    }

    /// Total number of Bernoulli trials (binomial) or observations.
    pub fn sample_size(&self) -> f64 {
        match &self.likelihood {
            Likelihood::BinomialCount { trials } => self.data.len() as f64 * *trials as f64,
            _ => self.data.len() as f64,
        }
    }
}

/// A posterior, in closed form or as a cloud of draws.
#[derive(Debug, Clone)]
pub enum Posterior {
    Analytic(Distribution),
    Sampled {
        cloud: EmpiricalMeasure,
        diagnostics: Option<McmcDiagnostics>,
    },
}

impl Posterior {
    pub fn dim(&self) -> usize {
        match self {
            Posterior::Analytic(_) => 1,
            Posterior::Sampled { cloud, .. } => cloud.dim(),
        }
    }

    pub fn analytic(&self) -> Option<&Distribution> {
        match self {
            Posterior::Analytic(d) => Some(d),
            Posterior::Sampled { .. } => None,
        }
    }
}

/// Closed-form posterior of a conjugate model.
///
/// Fails with [`WimError::ImproperPosterior`] when an improper prior does not
/// become proper after the update, and with [`WimError::Unsupported`] for
/// non-conjugate likelihood/prior pairs.
pub fn conjugate_posterior(model: &BayesModel) -> Result<Distribution> {
    let n = model.data.len() as f64;
    let s: f64 = model.data.iter().sum();
    let unsupported = || {
        WimError::Unsupported(format!(
            "prior {} is not conjugate to the {} model",
            model.prior.label(),
            model.likelihood.name()
        ))
    };
    match &model.likelihood {
        Likelihood::PoissonIid => {
            let (a, b) = model.prior.gamma_kernel().ok_or_else(unsupported)?;
            let (a1, b1) = (a + s, b + n);
            if a1 <= 0.0 || b1 <= 0.0 {
                return Err(WimError::ImproperPosterior(format!("Gamma({a1}, {b1})")));
            }
            Distribution::gamma(a1, b1)
        }
        Likelihood::BinomialCount { trials } => {
            let (a, b) = model.prior.beta_kernel().ok_or_else(unsupported)?;
            let (a1, b1) = (a + s, b + n * *trials as f64 - s);
            if a1 <= 0.0 || b1 <= 0.0 {
                return Err(WimError::ImproperPosterior(format!("Beta({a1}, {b1})")));
            }
            Distribution::beta(a1, b1)
        }
        Likelihood::NormalKnownMean { mean } => {
            let (a, b) = model.prior.inverse_gamma_kernel().ok_or_else(unsupported)?;
            let ss: f64 = model.data.iter().map(|x| (x - mean) * (x - mean)).sum();
            let (a1, b1) = (a + 0.5 * n, b + 0.5 * ss);
            if a1 <= 0.0 || b1 <= 0.0 {
                return Err(WimError::ImproperPosterior(format!("InverseGamma({a1}, {b1})")));
            }
            Distribution::inverse_gamma(a1, b1)
        }
        Likelihood::SkewNormalFull | Likelihood::LogisticDoseResponse { .. } => Err(WimError::Unsupported(
            format!("the {} model has no conjugate prior; use the sampler", model.likelihood.name()),
        )),
    }
}

pub fn conjugate_update(model: &BayesModel) -> Result<Posterior> {
    conjugate_posterior(model).map(Posterior::Analytic)
}

/// Log prior density of `theta` under the model's prior, up to a constant.
pub fn ln_prior(model: &BayesModel, theta: &[f64]) -> f64 {
    match &model.likelihood {
        Likelihood::SkewNormalFull => {
            let omega = theta[1];
            if omega <= 0.0 {
                return f64::NEG_INFINITY;
            }
            model.prior.ln_density_1d(theta[2]) - omega.ln()
        }
        Likelihood::LogisticDoseResponse { .. } => match &model.prior {
            PriorSpec::FlatPlane | PriorSpec::Flat => 0.0,
            PriorSpec::Custom(c) => (c.ln_density)(theta),
            p => {
                let intercept = Distribution::Cauchy { location: 0.0, scale: 10.0 };
                intercept.ln_pdf(theta[0]) + p.ln_density_1d(theta[1])
            }
        },
        _ => model.prior.ln_density_1d(theta[0]),
    }
}

/// Unnormalised log posterior density; `-inf` outside the parameter space.
pub fn log_posterior_unnorm(model: &BayesModel, theta: &[f64]) -> f64 {
    if theta.len() != model.likelihood.dim() || theta.iter().any(|t| t.is_nan()) {
        return f64::NAN;
    }
    let lp = ln_prior(model, theta);
    if lp == f64::NEG_INFINITY {
        return lp;
    }
    lp + model.likelihood.ln_likelihood(&model.data, theta)
}

/// Draws `m` new observations from the posterior predictive of a conjugate
/// model, redrawing the parameter for every observation.
pub fn posterior_predictive_sample<R: Rng + ?Sized>(
    posterior: &Distribution,
    likelihood: &Likelihood,
    m: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(m);
    for _ in 0..m {
        let theta = posterior.sample_one(rng);
        let y = match likelihood {
            Likelihood::PoissonIid => Distribution::poisson(theta.max(f64::MIN_POSITIVE))?.sample_one(rng),
            Likelihood::BinomialCount { trials } => Distribution::binomial(*trials, theta)?.sample_one(rng),
            Likelihood::NormalKnownMean { mean } => Distribution::normal(*mean, theta.sqrt())?.sample_one(rng),
            _ => {
                return Err(WimError::Unsupported(format!(
                    "posterior predictive draws for the {} model",
                    likelihood.name()
                )))
            }
        };
        out.push(y);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn model(l: Likelihood, data: Vec<f64>, prior: PriorSpec) -> BayesModel {
        BayesModel::new(l, data, prior).unwrap()
    }

    #[test]
    fn conjugate_updates() {
        let m = model(
            Likelihood::PoissonIid,
            vec![3.0, 5.0, 2.0, 4.0, 6.0],
            PriorSpec::gamma(2.5, 2.5).unwrap(),
        );
        assert_eq!(conjugate_posterior(&m).unwrap(), Distribution::Gamma { shape: 22.5, rate: 7.5 });

        let m = model(
            Likelihood::BinomialCount { trials: 10 },
            vec![7.0],
            PriorSpec::beta(0.0, 0.0).unwrap(),
        );
        assert_eq!(conjugate_posterior(&m).unwrap(), Distribution::Beta { alpha: 7.0, beta: 3.0 });

        let m = model(
            Likelihood::NormalKnownMean { mean: 0.0 },
            vec![1.0, -1.0, 2.0, 0.0],
            PriorSpec::JeffreysVariance,
        );
        assert_eq!(
            conjugate_posterior(&m).unwrap(),
            Distribution::InverseGamma { shape: 2.0, scale: 3.0 }
        );
        let flat = m.with_prior(PriorSpec::Flat);
        assert_eq!(
            conjugate_posterior(&flat).unwrap(),
            Distribution::InverseGamma { shape: 1.0, scale: 3.0 }
        );
    }

    #[test]
    fn improper_posteriors_are_reported() {
        let m = model(
            Likelihood::BinomialCount { trials: 10 },
            vec![0.0],
            PriorSpec::beta(0.0, 0.0).unwrap(),
        );
        assert!(matches!(conjugate_posterior(&m), Err(WimError::ImproperPosterior(_))));
        let m = model(Likelihood::PoissonIid, vec![0.0, 0.0], PriorSpec::gamma(0.0, 1.0).unwrap());
        assert!(matches!(conjugate_posterior(&m), Err(WimError::ImproperPosterior(_))));
    }

    #[test]
    fn bad_priors_and_data() {
        assert!(PriorSpec::gamma(-1.0, 2.0).is_err());
        assert!(BayesModel::new(Likelihood::PoissonIid, vec![1.5], PriorSpec::Flat).is_err());
        assert!(BayesModel::new(Likelihood::BinomialCount { trials: 3 }, vec![4.0], PriorSpec::Flat).is_err());
        let m = model(
            Likelihood::PoissonIid,
            vec![1.0],
            PriorSpec::Proper(Distribution::normal(0.0, 1.0).unwrap()),
        );
        assert!(matches!(conjugate_posterior(&m), Err(WimError::Unsupported(_))));
    }

    #[test]
    fn unnormalised_posterior_matches_conjugate_density() {
        let m = model(
            Likelihood::BinomialCount { trials: 1 },
            vec![1.0, 0.0, 1.0, 1.0],
            PriorSpec::beta(0.5, 0.5).unwrap(),
        );
        let post = conjugate_posterior(&m).unwrap();
        let d = |t: f64| log_posterior_unnorm(&m, &[t]) - post.ln_pdf(t);
        assert_relative_eq!(d(0.2), d(0.7), epsilon = 1e-12);
        assert_eq!(log_posterior_unnorm(&m, &[1.5]), f64::NEG_INFINITY);
    }

    #[test]
    fn predictive_draws_have_the_right_mean() {
        let post = Distribution::gamma(50.0, 10.0).unwrap();
        let mut rng = crate::rng::stream(3);
        let y = posterior_predictive_sample(&post, &Likelihood::PoissonIid, 40_000, &mut rng).unwrap();
        let m = y.iter().sum::<f64>() / y.len() as f64;
        assert_relative_eq!(m, 5.0, max_relative = 0.02);
        assert!(y.iter().all(|v| v.fract() == 0.0 && *v >= 0.0));
    }
}
