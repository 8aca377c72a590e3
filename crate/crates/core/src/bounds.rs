//! Stein-kernel bounds on the Wasserstein distance between two posteriors.
//!
//! With `ρ = p₂/p₁` the ratio of the two priors (equivalently of the two
//! posteriors up to a constant) and `τ₁` the Stein kernel of posterior 1,
//!
//! ```text
//! |E[τ₁ ρ']| / E[ρ]  <=  W₁(P₁, P₂)  <=  E[τ₁ |ρ'|] / E[ρ]
//! ```
//!
//! with expectations under `P₁`. The left side equals `|μ₁ - μ₂|`; when ρ is
//! monotone both sides coincide and give the exact distance.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::distributions::Distribution;
use crate::error::{domain, Result, WimError};
use crate::numeric::{integrate_pieces, Tolerance};
use crate::posterior::PriorSpec;

/// Stein kernel `τ(θ) = (1/p(θ)) ∫_a^θ (μ - y) p(y) dy` of a continuous law.
///
/// Closed forms are used for the Pearson families (gamma, beta, normal,
/// inverse gamma, Student t); otherwise see [`stein_kernel_numeric`].
pub fn stein_kernel(dist: &Distribution, theta: f64) -> Result<f64> {
    let (lo, hi) = dist.support();
    if !(theta > lo && theta < hi) {
        return Err(domain(format!("θ = {theta} is not inside the support ({lo}, {hi})")));
    }
    match *dist {
        Distribution::Gamma { rate, .. } => Ok(theta / rate),
        Distribution::Beta { alpha, beta } => Ok(theta * (1.0 - theta) / (alpha + beta)),
        Distribution::Normal { sd, .. } => Ok(sd * sd),
        Distribution::InverseGamma { shape, .. } if shape > 1.0 => Ok(theta * theta / (shape - 1.0)),
        Distribution::StudentT { location, scale, dof } if dof > 1.0 => {
            let d = theta - location;
            Ok((d * d + dof * scale * scale) / (dof - 1.0))
        }
        _ => stein_kernel_numeric(dist, theta),
    }
}

/// Stein kernel by direct quadrature of its defining integral.
///
/// Below the median the integral runs from the lower end of the support;
/// above it, the equivalent upper-tail form `∫_θ^b (y - μ) p(y) dy` is used.
pub fn stein_kernel_numeric(dist: &Distribution, theta: f64) -> Result<f64> {
    let mu = dist
        .mean()
        .ok_or_else(|| WimError::Divergence(format!("{:?} has no finite mean", dist.family())))?;
    let p = dist.pdf(theta);
    if !(p > 0.0) || !p.is_finite() {
        return Err(WimError::Underflow(format!("density is {p} at θ = {theta}")));
    }
    let (lo, hi) = dist.effective_range()?;
    let tol = Tolerance::new(0.0, 1e-11);
    let median = dist.quantile(0.5)?;
    let g = |y: f64| (mu - y) * dist.pdf(y);
    let negligible = 1e-17 * p * (hi - lo) * (hi - lo);
    let integral = if theta <= median {
        let mut breaks = vec![theta];
        if lo < theta {
            breaks.insert(0, lo);
        }
        extend_tail(&mut breaks, dist.support().0, |y| g(y).abs(), negligible, Side::Lower);
        integrate_pieces(g, &breaks, tol)?.value
    } else {
        let mut breaks = vec![theta];
        if hi > theta {
            breaks.push(hi);
        }
        extend_tail(&mut breaks, dist.support().1, |y| g(y).abs(), negligible, Side::Upper);
        -integrate_pieces(g, &breaks, tol)?.value
    };
    Ok((integral / p).max(0.0))
}

#[derive(Clone, Copy)]
enum Side {
    Lower,
    Upper,
}

/// Extends sorted `breaks` beyond its first (or last) point up to the support
/// end `limit`: directly when `limit` is finite, otherwise in doubling steps
/// until `g(x)` times the step is below `negligible`.
fn extend_tail<G: Fn(f64) -> f64>(breaks: &mut Vec<f64>, limit: f64, g: G, negligible: f64, side: Side) {
    let (first, last) = (breaks[0], breaks[breaks.len() - 1]);
    let mut step = (last - first).max(1e-3 * first.abs().max(1.0));
    match side {
        Side::Lower if limit.is_finite() => {
            if limit < first {
                breaks.insert(0, limit);
            }
        }
        Side::Upper if limit.is_finite() => {
            if limit > last {
                breaks.push(limit);
            }
        }
        Side::Lower => {
            let mut x = first;
            for _ in 0..200 {
                x -= step;
                breaks.insert(0, x);
                if !(g(x) * step >= negligible) {
                    break;
                }
                step *= 2.0;
            }
        }
        Side::Upper => {
            let mut x = last;
            for _ in 0..200 {
                x += step;
                breaks.push(x);
                if !(g(x) * step >= negligible) {
                    break;
                }
                step *= 2.0;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Monotonicity {
    Increasing,
    Decreasing,
    Unknown,
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// The ratio `ρ = p₂ / p₁`, held as `log ρ` and `(log ρ)' = ρ'/ρ` so that
/// unnormalised or improper priors can be used.
#[derive(Clone)]
pub struct DensityRatio {
    ln_rho: ScalarFn,
    dln_rho: ScalarFn,
    /// Interval `I₂` on which ρ is positive.
    pub support: (f64, f64),
    pub monotone: Monotonicity,
}

impl fmt::Debug for DensityRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DensityRatio")
            .field("support", &self.support)
            .field("monotone", &self.monotone)
            .finish()
    }
}

impl DensityRatio {
    pub fn new<L, D>(ln_rho: L, dln_rho: D, support: (f64, f64), monotone: Monotonicity) -> Self
    where
        L: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        DensityRatio {
            ln_rho: Arc::new(ln_rho),
            dln_rho: Arc::new(dln_rho),
            support,
            monotone,
        }
    }

    /// `ρ = prior₂ / prior₁` for scalar priors with closed-form log-density
    /// derivatives. Monotonicity starts as `Unknown`; see [`Self::declare`].
    pub fn from_priors(prior1: &PriorSpec, prior2: &PriorSpec, support: (f64, f64)) -> Result<Self> {
        let mid = if support.0.is_finite() && support.1.is_finite() {
            0.5 * (support.0 + support.1)
        } else if support.0.is_finite() {
            support.0 + 1.0
        } else {
            0.0
        };
        if prior1.d_ln_density_1d(mid).is_none() || prior2.d_ln_density_1d(mid).is_none() {
            return Err(WimError::Unsupported(format!(
                "no closed-form log-density derivative for {} or {}",
                prior1.label(),
                prior2.label()
            )));
        }
        let (a1, a2) = (prior1.clone(), prior2.clone());
        let (b1, b2) = (prior1.clone(), prior2.clone());
        Ok(DensityRatio::new(
            move |t| a2.ln_density_1d(t) - a1.ln_density_1d(t),
            move |t| b2.d_ln_density_1d(t).unwrap_or(f64::NAN) - b1.d_ln_density_1d(t).unwrap_or(f64::NAN),
            support,
            Monotonicity::Unknown,
        ))
    }

    pub fn declare(mut self, monotone: Monotonicity) -> Self {
        self.monotone = monotone;
        self
    }

    pub fn ln_rho(&self, t: f64) -> f64 {
        (self.ln_rho)(t)
    }

    pub fn rho(&self, t: f64) -> f64 {
        (self.ln_rho)(t).exp()
    }

    pub fn rho_prime(&self, t: f64) -> f64 {
        self.rho(t) * (self.dln_rho)(t)
    }

    pub fn dln_rho(&self, t: f64) -> f64 {
        (self.dln_rho)(t)
    }

    /// Checks the declared direction on a 1001-point grid over `range`.
    pub fn verify_monotone(&self, range: (f64, f64)) -> bool {
        let sign = match self.monotone {
            Monotonicity::Increasing => 1.0,
            Monotonicity::Decreasing => -1.0,
            Monotonicity::Unknown => return false,
        };
        let (a, b) = range;
        (0..1001).all(|k| {
            let t = a + (b - a) * (k as f64 + 0.5) / 1001.0;
            let d = self.dln_rho(t);
            d.is_finite() && sign * d >= -1e-12 * d.abs().max(1.0)
        })
    }
}

/// Lower/upper bounds with provenance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    pub lower: f64,
    pub upper: f64,
    /// The exact distance, when the bounds provably coincide.
    pub exact: Option<f64>,
    pub method: String,
    pub warnings: Vec<String>,
}

fn expectation<F: Fn(f64) -> f64>(f: F, breaks: &[f64], name: &str, tol: Tolerance) -> Result<f64> {
    let r = integrate_pieces(f, breaks, tol).map_err(|e| WimError::Divergence(format!("{name}: {e}")))?;
    if !r.value.is_finite() {
        return Err(WimError::Divergence(format!("{name} is not finite")));
    }
    Ok(r.value)
}

/// Bounds from the general Stein-kernel inequality.
///
/// `p1` is posterior 1 and `ratio` is `p₂/p₁`. Expectations are integrated
/// over the effective range of `p1` intersected with `ratio.support`. When the
/// ratio is declared monotone and the grid check confirms it, `exact` is set
/// to the upper bound; a failed check leaves `exact` empty with a warning.
pub fn theorem1_bounds(p1: &Distribution, ratio: &DensityRatio) -> Result<BoundsReport> {
    if p1.is_discrete() {
        return Err(WimError::Unsupported("bounds need a continuous posterior".into()));
    }
    let (e_lo, e_hi) = p1.effective_range()?;
    let lo = e_lo.max(ratio.support.0);
    let hi = e_hi.min(ratio.support.1);
    if lo >= hi {
        return Err(domain("ratio support does not overlap the posterior"));
    }
    let mut breaks = vec![lo];
    for u in [1e-3, 0.5, 1.0 - 1e-3] {
        let x = p1.quantile(u)?;
        if x > lo && x < hi && x > *breaks.last().unwrap() {
            breaks.push(x);
        }
    }
    breaks.push(hi);

    // Scale p1 ρ by its maximum over a grid so that unnormalised ratios stay in range.
    let log_w = |t: f64| p1.ln_pdf(t) + ratio.ln_rho(t);
    let shift = (1..400)
        .map(|k| lo + (hi - lo) * k as f64 / 400.0)
        .chain(breaks.iter().copied().filter(|t| *t > lo && *t < hi))
        .map(log_w)
        .filter(|v| v.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    if !shift.is_finite() {
        return Err(WimError::Divergence("E[ρ]: p1 ρ vanishes on the grid".into()));
    }
    let sup = (p1.support().0.max(ratio.support.0), p1.support().1.min(ratio.support.1));
    let w = |t: f64| {
        // A node can round onto a finite support end where ρ may be infinite;
        // a single point carries no mass.
        if t <= sup.0 || t >= sup.1 {
            return 0.0;
        }
        let v = (log_w(t) - shift).exp();
        if v.is_nan() {
            0.0
        } else {
            v
        }
    };
    let tau = |t: f64| stein_kernel(p1, t).unwrap_or(0.0);
    let size = |t: f64| w(t) * (1.0 + tau(t) * ratio.dln_rho(t).abs());
    extend_tail(&mut breaks, sup.0, size, 1e-16, Side::Lower);
    extend_tail(&mut breaks, sup.1, size, 1e-16, Side::Upper);
    let tol = Tolerance::new(0.0, 1e-11);
    let z = expectation(&w, &breaks, "E[ρ]", tol)?;
    if !(z > 0.0) {
        return Err(WimError::Divergence("E[ρ] is zero".into()));
    }
    let up = expectation(
        |t| {
            let wt = w(t);
            if wt == 0.0 {
                0.0
            } else {
                wt * tau(t) * ratio.dln_rho(t).abs()
            }
        },
        &breaks,
        "E[τ₁|ρ'|]",
        tol,
    )?;
    let tol_low = Tolerance::new(1e-12 * up.max(z * f64::MIN_POSITIVE), 1e-11);
    let low = expectation(
        |t| {
            let wt = w(t);
            if wt == 0.0 {
                0.0
            } else {
                wt * tau(t) * ratio.dln_rho(t)
            }
        },
        &breaks,
        "E[τ₁ρ']",
        tol_low,
    )?;
    let lower = low.abs() / z;
    let upper = (up / z).max(lower);
    let mut warnings = Vec::new();
    let exact = match ratio.monotone {
        Monotonicity::Unknown => None,
        _ if ratio.verify_monotone((lo, hi)) => Some(upper),
        _ => {
            warnings.push("declared monotone ratio changes direction on the grid; exact value withheld".into());
            None
        }
    };
    Ok(BoundsReport {
        lower,
        upper,
        exact,
        method: "stein-kernel".into(),
        warnings,
    })
}

/// Closed-form distance between two gamma posteriors of a Poisson model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoissonExact {
    pub value: f64,
    /// True when the prior ratio is monotone, which makes `value` the exact
    /// distance; otherwise it is the lower bound `|μ₁ - μ₂|`.
    pub proven: bool,
}

/// `(1/(n+β₁)) |α₂ - α₁ - (β₂ - β₁)(α₂ + Σx)/(n+β₂)|` for Gamma(α₁,β₁) and
/// Gamma(α₂,β₂) priors.
///
/// Proven exact when `α₁ < α₂, β₁ > β₂` or `α₁ > α₂, β₁ < β₂` (or when the
/// priors coincide in one parameter, where the ratio is still monotone).
pub fn poisson_gamma_exact(a1: f64, b1: f64, a2: f64, b2: f64, n: f64, sum_x: f64) -> Result<PoissonExact> {
    if !(n + b1 > 0.0) || !(n + b2 > 0.0) {
        return Err(domain(format!("n + β must be positive, got {} and {}", n + b1, n + b2)));
    }
    if !(a1 + sum_x > 0.0 && a2 + sum_x > 0.0) {
        return Err(WimError::ImproperPosterior("α + Σx must be positive".into()));
    }
    let value = (a2 - a1 - (b2 - b1) * (a2 + sum_x) / (n + b2)).abs() / (n + b1);
    let proven = (a1 - a2) * (b1 - b2) <= 0.0;
    Ok(PoissonExact { value, proven })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum BinomialVariant {
    BetaVsUniform { alpha: f64, beta: f64 },
    JeffreysVsUniform,
    HaldaneVsUniform,
}

/// Closed-form bounds between the uniform-prior posterior and the posterior
/// under another beta-kernel prior, for `x` successes in `n` trials.
pub fn binomial_bounds(variant: BinomialVariant, n: u64, x: u64) -> Result<BoundsReport> {
    if x > n {
        return Err(domain(format!("x = {x} exceeds n = {n}")));
    }
    let (nf, xf) = (n as f64, x as f64);
    let (lower, upper, monotone, method) = match variant {
        BinomialVariant::BetaVsUniform { alpha: a, beta: b } => {
            if !(a > 0.0 && b > 0.0) {
                return Err(domain("beta prior parameters must be positive"));
            }
            let s = nf + a + b;
            let lower = ((xf + 1.0) / (nf + 2.0) * ((a + b - 2.0) / s) - (a - 1.0) / s).abs();
            let upper = ((a - 1.0).abs() + (xf + a) / s * ((b - 1.0).abs() - (a - 1.0).abs())) / (nf + 2.0);
            (lower, upper, (a - 1.0) * (b - 1.0) <= 0.0, "binomial-beta")
        }
        BinomialVariant::JeffreysVsUniform => {
            let lower = (0.5 * nf - xf).abs() / ((nf + 2.0) * (nf + 1.0));
            let upper = (((xf + 0.5) * (nf - xf + 0.5) / ((nf + 2.0) * (nf + 1.0) * (nf + 1.0))).sqrt()
                + ((xf + 0.5) / (nf + 1.0) - 0.5).abs())
                / (nf + 2.0);
            (lower, upper, false, "binomial-jeffreys")
        }
        BinomialVariant::HaldaneVsUniform => {
            if x == 0 || x == n {
                return Err(WimError::ImproperPosterior(format!(
                    "Haldane prior with x = {x} of n = {n} successes"
                )));
            }
            let lower = 2.0 * (0.5 * nf - xf).abs() / (nf * (nf + 2.0));
            let upper = 2.0 / (nf + 2.0)
                * ((xf * (nf - xf) / (nf * nf * (nf + 1.0))).sqrt() + (xf / nf - 0.5).abs());
            (lower, upper, false, "binomial-haldane")
        }
    };
    Ok(BoundsReport {
        lower,
        upper,
        exact: monotone.then_some(upper),
        method: method.into(),
        warnings: Vec::new(),
    })
}

/// Closed-form bounds between the Jeffreys-prior posterior of a normal
/// variance and the posterior under an IG(α, β) prior; `s` is `Σ(xᵢ - μ)²`.
pub fn normal_ig_bounds(alpha: f64, beta: f64, n: u64, s: f64) -> Result<BoundsReport> {
    let nf = n as f64;
    let denom = (0.5 * nf + alpha - 1.0) * (0.5 * nf - 1.0);
    if !(0.5 * nf - 1.0 > 0.0) || !(0.5 * nf + alpha - 1.0 > 0.0) {
        return Err(domain(format!("bounds need n/2 - 1 > 0 and n/2 + α - 1 > 0 (n = {n}, α = {alpha})")));
    }
    if !(s >= 0.0) || !(beta >= 0.0) {
        return Err(domain("sum of squares and β must be non-negative"));
    }
    let lower = (0.5 * alpha * s - (0.5 * nf - 1.0) * beta).abs() / denom;
    let upper = (0.5 * alpha * s + 0.5 * nf * beta + beta * (2.0 * alpha - 1.0)) / denom;
    Ok(BoundsReport {
        lower,
        upper: upper.max(lower),
        exact: (beta == 0.0).then_some(upper.max(lower)),
        method: "normal-inverse-gamma".into(),
        warnings: Vec::new(),
    })
}
