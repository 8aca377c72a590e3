//! Univariate families used as priors, posteriors and likelihoods.
//!
//! Build values through the checked constructors ([`Distribution::gamma`] and
//! friends); the evaluation methods assume valid parameters.

use std::f64::consts::{FRAC_2_PI, LN_2, PI};

use rand::Rng;
use serde::Serialize;

use crate::error::{domain, invalid, Result};
use crate::numeric::special::{
    beta_reg, gamma_lr, gamma_ur, ln_beta, ln_gamma, ln_norm_cdf, ln_norm_pdf, norm_cdf, norm_pdf,
    norm_quantile,
};
use crate::numeric::{brent, expand_bracket, integrate, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Family {
    Gamma,
    Beta,
    Normal,
    InverseGamma,
    StudentT,
    SkewNormal,
    Cauchy,
    Poisson,
    Binomial,
    UniformInterval,
}

/// A parametrised univariate law.
///
/// Gamma uses shape/rate, inverse gamma shape/scale, Student t and Cauchy a
/// location and a scale (not a variance).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Distribution {
    Gamma { shape: f64, rate: f64 },
    Beta { alpha: f64, beta: f64 },
    Normal { mean: f64, sd: f64 },
    InverseGamma { shape: f64, scale: f64 },
    StudentT { location: f64, scale: f64, dof: f64 },
    SkewNormal { location: f64, scale: f64, shape: f64 },
    Cauchy { location: f64, scale: f64 },
    Poisson { rate: f64 },
    Binomial { trials: u64, p: f64 },
    Uniform { lo: f64, hi: f64 },
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be finite and positive, got {v}")))
    }
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be finite, got {v}")))
    }
}

impl Distribution {
    pub fn gamma(shape: f64, rate: f64) -> Result<Self> {
        positive("gamma shape", shape)?;
        positive("gamma rate", rate)?;
        Ok(Distribution::Gamma { shape, rate })
    }

    pub fn beta(alpha: f64, beta: f64) -> Result<Self> {
        positive("beta alpha", alpha)?;
        positive("beta beta", beta)?;
        Ok(Distribution::Beta { alpha, beta })
    }

    pub fn normal(mean: f64, sd: f64) -> Result<Self> {
        finite("normal mean", mean)?;
        positive("normal sd", sd)?;
        Ok(Distribution::Normal { mean, sd })
    }

    pub fn inverse_gamma(shape: f64, scale: f64) -> Result<Self> {
        positive("inverse-gamma shape", shape)?;
        positive("inverse-gamma scale", scale)?;
        Ok(Distribution::InverseGamma { shape, scale })
    }

    pub fn student_t(location: f64, scale: f64, dof: f64) -> Result<Self> {
        finite("t location", location)?;
        positive("t scale", scale)?;
        positive("t degrees of freedom", dof)?;
        Ok(Distribution::StudentT { location, scale, dof })
    }

    pub fn skew_normal(location: f64, scale: f64, shape: f64) -> Result<Self> {
        finite("skew-normal location", location)?;
        positive("skew-normal scale", scale)?;
        finite("skew-normal shape", shape)?;
        Ok(Distribution::SkewNormal { location, scale, shape })
    }

    pub fn cauchy(location: f64, scale: f64) -> Result<Self> {
        finite("cauchy location", location)?;
        positive("cauchy scale", scale)?;
        Ok(Distribution::Cauchy { location, scale })
    }

    pub fn poisson(rate: f64) -> Result<Self> {
        positive("poisson rate", rate)?;
        Ok(Distribution::Poisson { rate })
    }

    pub fn binomial(trials: u64, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(invalid(format!("binomial p must lie in [0, 1], got {p}")));
        }
        Ok(Distribution::Binomial { trials, p })
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        finite("uniform lower end", lo)?;
        finite("uniform upper end", hi)?;
        if hi <= lo {
            return Err(invalid(format!("uniform needs lo < hi, got [{lo}, {hi}]")));
        }
        Ok(Distribution::Uniform { lo, hi })
    }

    /// Re-runs the constructor checks, for values built from the variants directly.
    pub fn validate(&self) -> Result<()> {
        let rebuilt = match *self {
            Distribution::Gamma { shape, rate } => Distribution::gamma(shape, rate),
            Distribution::Beta { alpha, beta } => Distribution::beta(alpha, beta),
            Distribution::Normal { mean, sd } => Distribution::normal(mean, sd),
            Distribution::InverseGamma { shape, scale } => Distribution::inverse_gamma(shape, scale),
            Distribution::StudentT { location, scale, dof } => Distribution::student_t(location, scale, dof),
            Distribution::SkewNormal { location, scale, shape } => {
                Distribution::skew_normal(location, scale, shape)
            }
            Distribution::Cauchy { location, scale } => Distribution::cauchy(location, scale),
            Distribution::Poisson { rate } => Distribution::poisson(rate),
            Distribution::Binomial { trials, p } => Distribution::binomial(trials, p),
            Distribution::Uniform { lo, hi } => Distribution::uniform(lo, hi),
        };
        rebuilt.map(|_| ())
    }

    pub fn family(&self) -> Family {
        match self {
            Distribution::Gamma { .. } => Family::Gamma,
            Distribution::Beta { .. } => Family::Beta,
            Distribution::Normal { .. } => Family::Normal,
            Distribution::InverseGamma { .. } => Family::InverseGamma,
            Distribution::StudentT { .. } => Family::StudentT,
            Distribution::SkewNormal { .. } => Family::SkewNormal,
            Distribution::Cauchy { .. } => Family::Cauchy,
            Distribution::Poisson { .. } => Family::Poisson,
            Distribution::Binomial { .. } => Family::Binomial,
            Distribution::Uniform { .. } => Family::UniformInterval,
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match *self {
            Distribution::Gamma { shape, rate } => vec![shape, rate],
            Distribution::Beta { alpha, beta } => vec![alpha, beta],
            Distribution::Normal { mean, sd } => vec![mean, sd],
            Distribution::InverseGamma { shape, scale } => vec![shape, scale],
            Distribution::StudentT { location, scale, dof } => vec![location, scale, dof],
            Distribution::SkewNormal { location, scale, shape } => vec![location, scale, shape],
            Distribution::Cauchy { location, scale } => vec![location, scale],
            Distribution::Poisson { rate } => vec![rate],
            Distribution::Binomial { trials, p } => vec![trials as f64, p],
            Distribution::Uniform { lo, hi } => vec![lo, hi],
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, Distribution::Poisson { .. } | Distribution::Binomial { .. })
    }

    /// Closed support `(lo, hi)`; ends may be infinite.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            Distribution::Gamma { .. } | Distribution::InverseGamma { .. } | Distribution::Poisson { .. } => {
                (0.0, f64::INFINITY)
            }
            Distribution::Beta { .. } => (0.0, 1.0),
            Distribution::Binomial { trials, .. } => (0.0, trials as f64),
            Distribution::Uniform { lo, hi } => (lo, hi),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    pub fn mean(&self) -> Option<f64> {
        match *self {
            Distribution::Gamma { shape, rate } => Some(shape / rate),
            Distribution::Beta { alpha, beta } => Some(alpha / (alpha + beta)),
            Distribution::Normal { mean, .. } => Some(mean),
            Distribution::InverseGamma { shape, scale } => (shape > 1.0).then(|| scale / (shape - 1.0)),
            Distribution::StudentT { location, dof, .. } => (dof > 1.0).then_some(location),
            Distribution::SkewNormal { location, scale, shape } => {
                let delta = shape / (1.0 + shape * shape).sqrt();
                Some(location + scale * delta * FRAC_2_PI.sqrt())
            }
            Distribution::Cauchy { .. } => None,
            Distribution::Poisson { rate } => Some(rate),
            Distribution::Binomial { trials, p } => Some(trials as f64 * p),
            Distribution::Uniform { lo, hi } => Some(0.5 * (lo + hi)),
        }
    }

    pub fn variance(&self) -> Option<f64> {
        match *self {
            Distribution::Gamma { shape, rate } => Some(shape / (rate * rate)),
            Distribution::Beta { alpha, beta } => {
                let s = alpha + beta;
                Some(alpha * beta / (s * s * (s + 1.0)))
            }
            Distribution::Normal { sd, .. } => Some(sd * sd),
            Distribution::InverseGamma { shape, scale } => (shape > 2.0)
                .then(|| scale * scale / ((shape - 1.0) * (shape - 1.0) * (shape - 2.0))),
            Distribution::StudentT { scale, dof, .. } => (dof > 2.0).then(|| scale * scale * dof / (dof - 2.0)),
            Distribution::SkewNormal { scale, shape, .. } => {
                let delta2 = shape * shape / (1.0 + shape * shape);
                Some(scale * scale * (1.0 - FRAC_2_PI * delta2))
            }
            Distribution::Cauchy { .. } => None,
            Distribution::Poisson { rate } => Some(rate),
            Distribution::Binomial { trials, p } => Some(trials as f64 * p * (1.0 - p)),
            Distribution::Uniform { lo, hi } => Some((hi - lo) * (hi - lo) / 12.0),
        }
    }

    /// Log density (log mass for the discrete families); `-inf` off the support.
    pub fn ln_pdf(&self, x: f64) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        match *self {
            Distribution::Gamma { shape, rate } => {
                if x < 0.0 || x.is_infinite() {
                    return f64::NEG_INFINITY;
                }
                if x == 0.0 {
                    return match shape.partial_cmp(&1.0) {
                        Some(std::cmp::Ordering::Less) => f64::INFINITY,
                        Some(std::cmp::Ordering::Equal) => rate.ln(),
                        _ => f64::NEG_INFINITY,
                    };
                }
                shape * rate.ln() - ln_gamma(shape) + (shape - 1.0) * x.ln() - rate * x
            }
            Distribution::Beta { alpha, beta } => {
                if !(0.0..=1.0).contains(&x) {
                    return f64::NEG_INFINITY;
                }
                let a_term = if alpha == 1.0 { 0.0 } else { (alpha - 1.0) * x.ln() };
                let b_term = if beta == 1.0 { 0.0 } else { (beta - 1.0) * (-x).ln_1p() };
                a_term + b_term - ln_beta(alpha, beta)
            }
            Distribution::Normal { mean, sd } => ln_norm_pdf((x - mean) / sd) - sd.ln(),
            Distribution::InverseGamma { shape, scale } => {
                if x <= 0.0 || x.is_infinite() {
                    return f64::NEG_INFINITY;
                }
                shape * scale.ln() - ln_gamma(shape) - (shape + 1.0) * x.ln() - scale / x
            }
            Distribution::StudentT { location, scale, dof } => {
                let t = (x - location) / scale;
                ln_gamma(0.5 * (dof + 1.0))
                    - ln_gamma(0.5 * dof)
                    - 0.5 * (dof * PI).ln()
                    - scale.ln()
                    - 0.5 * (dof + 1.0) * (t * t / dof).ln_1p()
            }
            Distribution::SkewNormal { location, scale, shape } => {
                let z = (x - location) / scale;
                LN_2 - scale.ln() + ln_norm_pdf(z) + ln_norm_cdf(shape * z)
            }
            Distribution::Cauchy { location, scale } => {
                let z = (x - location) / scale;
                -(PI * scale).ln() - (z * z).ln_1p()
            }
            Distribution::Poisson { rate } => {
                if x < 0.0 || x.fract() != 0.0 || x.is_infinite() {
                    return f64::NEG_INFINITY;
                }
                x * rate.ln() - rate - ln_gamma(x + 1.0)
            }
            Distribution::Binomial { trials, p } => {
                let n = trials as f64;
                if x < 0.0 || x > n || x.fract() != 0.0 {
                    return f64::NEG_INFINITY;
                }
                let ln_choose = ln_gamma(n + 1.0) - ln_gamma(x + 1.0) - ln_gamma(n - x + 1.0);
                let s = if x == 0.0 { 0.0 } else { x * p.ln() };
                let f = if x == n { 0.0 } else { (n - x) * (-p).ln_1p() };
                ln_choose + s + f
            }
            Distribution::Uniform { lo, hi } => {
                if (lo..=hi).contains(&x) {
                    -(hi - lo).ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
        }
    }

    /// Density, or probability mass for the discrete families.
    pub fn pdf(&self, x: f64) -> f64 {
        match *self {
            Distribution::Normal { mean, sd } => norm_pdf((x - mean) / sd) / sd,
            _ => self.ln_pdf(x).exp(),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        match *self {
            Distribution::Gamma { shape, rate } => {
                if x <= 0.0 {
                    0.0
                } else if x.is_infinite() {
                    1.0
                } else {
                    gamma_lr(shape, rate * x)
                }
            }
            Distribution::Beta { alpha, beta } => {
                if x <= 0.0 {
                    0.0
                } else if x >= 1.0 {
                    1.0
                } else {
                    beta_reg(alpha, beta, x)
                }
            }
            Distribution::Normal { mean, sd } => norm_cdf((x - mean) / sd),
            Distribution::InverseGamma { shape, scale } => {
                if x <= 0.0 {
                    0.0
                } else if x.is_infinite() {
                    1.0
                } else {
                    gamma_ur(shape, scale / x)
                }
            }
            Distribution::StudentT { location, scale, dof } => {
                let t = (x - location) / scale;
                if t.is_infinite() {
                    return if t > 0.0 { 1.0 } else { 0.0 };
                }
                let tail = 0.5 * beta_reg(0.5 * dof, 0.5, dof / (dof + t * t));
                if t > 0.0 {
                    1.0 - tail
                } else {
                    tail
                }
            }
            Distribution::SkewNormal { location, scale, shape } => {
                let z = (x - location) / scale;
                if z.is_infinite() {
                    return if z > 0.0 { 1.0 } else { 0.0 };
                }
                (norm_cdf(z) - 2.0 * owens_t(z, shape)).clamp(0.0, 1.0)
            }
            Distribution::Cauchy { location, scale } => 0.5 + ((x - location) / scale).atan() / PI,
            Distribution::Poisson { rate } => {
                if x < 0.0 {
                    0.0
                } else if x.is_infinite() {
                    1.0
                } else {
                    gamma_ur(x.floor() + 1.0, rate)
                }
            }
            Distribution::Binomial { trials, p } => {
                let n = trials as f64;
                let k = x.floor();
                if k < 0.0 {
                    0.0
                } else if k >= n {
                    1.0
                } else if p == 0.0 {
                    1.0
                } else if p == 1.0 {
                    0.0
                } else {
                    beta_reg(n - k, k + 1.0, 1.0 - p)
                }
            }
            Distribution::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
        }
    }

    /// Generalised inverse of the cdf, `inf { x : F(x) >= u }`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) {
            return Err(domain(format!("quantile level must lie in [0, 1], got {u}")));
        }
        let (lo, hi) = self.support();
        if u == 0.0 {
            return Ok(lo);
        }
        if u == 1.0 {
            return Ok(hi);
        }
        match *self {
            Distribution::Normal { mean, sd } => Ok(mean + sd * norm_quantile(u)),
            Distribution::Cauchy { location, scale } => Ok(location + scale * (PI * (u - 0.5)).tan()),
            Distribution::Uniform { lo, hi } => Ok(lo + u * (hi - lo)),
            Distribution::Poisson { .. } | Distribution::Binomial { .. } => Ok(self.discrete_quantile(u)),
            _ => self.continuous_quantile(u),
        }
    }

    fn discrete_quantile(&self, u: f64) -> f64 {
        let (_, hi) = self.support();
        let mean = self.mean().unwrap_or(0.0);
        let sd = self.variance().unwrap_or(0.0).sqrt();
        let mut k = (mean + sd * norm_quantile(u)).floor().clamp(0.0, hi);
        while k > 0.0 && self.cdf(k - 1.0) >= u {
            k -= 1.0;
        }
        while k < hi && self.cdf(k) < u {
            k += 1.0;
        }
        k
    }

    fn continuous_quantile(&self, u: f64) -> Result<f64> {
        let (lo, hi) = self.support();
        let (g_lo, g_hi) = self.initial_bracket(u);
        let (a, b) = expand_bracket(|x| self.cdf(x) - u, g_lo, g_hi, lo, hi)?;
        brent(|x| self.cdf(x) - u, a, b, f64::MIN_POSITIVE)
    }

    fn initial_bracket(&self, u: f64) -> (f64, f64) {
        match *self {
            Distribution::Beta { .. } => (0.0, 1.0),
            Distribution::StudentT { location, scale, dof } => {
                let w = scale * (1.0 + 1.0 / dof) * norm_quantile(u).abs().max(1.0);
                (location - w, location + w)
            }
            _ => {
                let (lo, hi) = self.support();
                let m = self.mean().unwrap_or(0.0);
                let s = self.variance().unwrap_or(1.0).sqrt();
                let z = norm_quantile(u);
                let c = m + s * z;
                let a = (c - s).max(lo);
                let b = (c + s).min(hi);
                if a < b {
                    (a, b)
                } else {
                    (lo.max(m - s), hi.min(m + s))
                }
            }
        }
    }

    /// Draws one value.
    pub fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let mut out = self.sample(rng, 1);
        out.pop().unwrap_or(f64::NAN)
    }

    /// Draws `n` independent values.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        use rand_distr::Distribution as _;
        const VALID: &str = "parameters were validated at construction";
        match *self {
            Distribution::Gamma { shape, rate } => {
                let g = rand_distr::Gamma::new(shape, 1.0 / rate).expect(VALID);
                (0..n).map(|_| g.sample(rng)).collect()
            }
            Distribution::Beta { alpha, beta } => {
                let b = rand_distr::Beta::new(alpha, beta).expect(VALID);
                (0..n).map(|_| b.sample(rng)).collect()
            }
            Distribution::Normal { mean, sd } => {
                let d = rand_distr::Normal::new(mean, sd).expect(VALID);
                (0..n).map(|_| d.sample(rng)).collect()
            }
            Distribution::InverseGamma { shape, scale } => {
                let g = rand_distr::Gamma::new(shape, 1.0).expect(VALID);
                (0..n).map(|_| scale / g.sample(rng)).collect()
            }
            Distribution::StudentT { location, scale, dof } => {
                let t = rand_distr::StudentT::new(dof).expect(VALID);
                (0..n).map(|_| location + scale * t.sample(rng)).collect()
            }
            Distribution::SkewNormal { location, scale, shape } => {
                let delta = shape / (1.0 + shape * shape).sqrt();
                let c = (1.0 - delta * delta).sqrt();
                (0..n)
                    .map(|_| {
                        let z0: f64 = rng.sample(rand_distr::StandardNormal);
                        let z1: f64 = rng.sample(rand_distr::StandardNormal);
                        location + scale * (delta * z0.abs() + c * z1)
                    })
                    .collect()
            }
            Distribution::Cauchy { location, scale } => {
                let d = rand_distr::Cauchy::new(location, scale).expect(VALID);
                (0..n).map(|_| d.sample(rng)).collect()
            }
            Distribution::Poisson { rate } => {
                let d = rand_distr::Poisson::new(rate).expect(VALID);
                (0..n).map(|_| d.sample(rng)).collect()
            }
            Distribution::Binomial { trials, p } => {
                let d = rand_distr::Binomial::new(trials, p).expect(VALID);
                (0..n).map(|_| d.sample(rng) as f64).collect()
            }
            Distribution::Uniform { lo, hi } => (0..n).map(|_| lo + (hi - lo) * rng.random::<f64>()).collect(),
        }
    }

    /// Quantile `1e-9` and `1 - 1e-9`, the range used to truncate infinite supports.
    pub fn effective_range(&self) -> Result<(f64, f64)> {
        let (lo, hi) = self.support();
        let a = if lo.is_finite() { lo } else { self.quantile(TAIL)? };
        let b = if hi.is_finite() { hi } else { self.quantile(1.0 - TAIL)? };
        Ok((a, b))
    }
}

/// Tail probability cut from each side of an infinite support.
pub const TAIL: f64 = 1e-9;

/// Owen's T function, `T(h, a) = (1/2π) ∫₀ᵃ exp(-h²(1+x²)/2) / (1+x²) dx`.
pub fn owens_t(h: f64, a: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    if a < 0.0 {
        return -owens_t(h, -a);
    }
    let hh = 0.5 * h * h;
    let f = |x: f64| {
        let q = 1.0 + x * x;
        (-hh * q).exp() / q
    };
    let tol = Tolerance::new(1e-15, 1e-12);
    // Past x ≈ 40/|h| the integrand is below e^-800, so clip the range.
    let upper = if h.abs() > 1e-3 { a.min(40.0 / h.abs()) } else { a };
    let r = match integrate(f, 0.0, upper, tol) {
        Ok(r) => r.value,
        Err(crate::WimError::Integration { estimate, .. }) => estimate,
        Err(_) => f64::NAN,
    };
    r / (2.0 * PI)
}

/// Fast approximate inverse cdf of a continuous distribution.
///
/// Cubic Hermite interpolation of `x(z) = Q(Φ(z))` on an adaptive grid of
/// normal scores, with the exact slope `φ(z) / f(x)`. Each interval is split
/// until the midpoint satisfies `|F(x̃) - Φ(z)| <= tol`. Levels outside the
/// tabulated range fall back to [`Distribution::quantile`].
#[derive(Debug, Clone)]
pub struct InverseCdf {
    dist: Distribution,
    z: Vec<f64>,
    x: Vec<f64>,
    dx: Vec<f64>,
    u_lo: f64,
    u_hi: f64,
}

const Z_RANGE: f64 = 7.0;
const MAX_NODES: usize = 20_000;

impl InverseCdf {
    pub fn new(dist: &Distribution) -> Result<Self> {
        Self::with_tolerance(dist, 1e-11)
    }

    pub fn with_tolerance(dist: &Distribution, tol: f64) -> Result<Self> {
        if dist.is_discrete() {
            return Err(crate::WimError::Unsupported(
                "tabulated inverse cdf needs a continuous distribution".into(),
            ));
        }
        let node = |z: f64| -> Result<(f64, f64)> {
            let x = dist.quantile(norm_cdf(z))?;
            let f = dist.pdf(x);
            let d = if f.is_finite() && f > 0.0 { norm_pdf(z) / f } else { f64::NAN };
            Ok((x, d))
        };
        let initial = 29;
        let mut z: Vec<f64> = Vec::new();
        let mut x = Vec::new();
        let mut dx = Vec::new();
        for i in 0..initial {
            let zi = -Z_RANGE + 2.0 * Z_RANGE * i as f64 / (initial - 1) as f64;
            let (xi, di) = node(zi)?;
            z.push(zi);
            x.push(xi);
            dx.push(di);
        }
        // Refine left to right with an explicit stack of pending intervals.
        let mut out_z = vec![z[0]];
        let mut out_x = vec![x[0]];
        let mut out_d = vec![dx[0]];
        for i in 0..initial - 1 {
            let mut stack = vec![(z[i + 1], x[i + 1], dx[i + 1])];
            while let Some(&(zb, xb, db)) = stack.last() {
                let za = *out_z.last().unwrap();
                let xa = *out_x.last().unwrap();
                let da = *out_d.last().unwrap();
                let zm = 0.5 * (za + zb);
                let xm = hermite(za, zb, xa, xb, da, db, zm);
                let err = (dist.cdf(xm) - norm_cdf(zm)).abs();
                let splittable = zm > za && zm < zb && out_z.len() + stack.len() < MAX_NODES;
                if err > tol && splittable && (zb - za) > 1e-9 {
                    let (xn, dn) = node(zm)?;
                    stack.push((zm, xn, dn));
                } else {
                    stack.pop();
                    out_z.push(zb);
                    out_x.push(xb);
                    out_d.push(db);
                }
            }
        }
        Ok(InverseCdf {
            dist: *dist,
            u_lo: norm_cdf(-Z_RANGE),
            u_hi: norm_cdf(Z_RANGE),
            z: out_z,
            x: out_x,
            dx: out_d,
        })
    }

    pub fn distribution(&self) -> &Distribution {
        &self.dist
    }

    pub fn nodes(&self) -> usize {
        self.z.len()
    }

    /// Approximate `Q(u)`.
    pub fn eval(&self, u: f64) -> f64 {
        if u <= self.u_lo || u >= self.u_hi {
            return self.dist.quantile(u.clamp(0.0, 1.0)).unwrap_or(f64::NAN);
        }
        let zu = norm_quantile(u);
        let k = self.z.partition_point(|&zn| zn <= zu).clamp(1, self.z.len() - 1);
        hermite(
            self.z[k - 1],
            self.z[k],
            self.x[k - 1],
            self.x[k],
            self.dx[k - 1],
            self.dx[k],
            zu,
        )
    }
}

fn hermite(za: f64, zb: f64, xa: f64, xb: f64, da: f64, db: f64, z: f64) -> f64 {
    let h = zb - za;
    let t = (z - za) / h;
    if !da.is_finite() || !db.is_finite() {
        return xa + t * (xb - xa);
    }
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    h00 * xa + h10 * h * da + h01 * xb + h11 * h * db
}
