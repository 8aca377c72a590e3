//! Closed-form 1-D Wasserstein distances by quadrature.
//!
//! On the line `W₁ = ∫ |F₁ - F₂| dx = ∫₀¹ |Q₁ - Q₂| du` and
//! `W_p^p = ∫₀¹ |Q₁ - Q₂|^p du`.

use crate::distributions::{Distribution, InverseCdf, TAIL};
use crate::error::{domain, Result, WimError};
use crate::numeric::{integrate_pieces, Integral, Tolerance};

/// Tolerance used by the distribution-level helpers.
pub const W_TOLERANCE: Tolerance = Tolerance {
    abs: 1e-12,
    rel: 1e-10,
    max_intervals: 4000,
};

const U_BREAKS: [f64; 9] = [TAIL, 1e-6, 1e-3, 0.02, 0.5, 0.98, 1.0 - 1e-3, 1.0 - 1e-6, 1.0 - TAIL];

/// `∫ₐᵇ |F₁(x) - F₂(x)| dx` over a finite interval.
pub fn w1_cdf<F1, F2>(f1: F1, f2: F2, a: f64, b: f64, tol: Tolerance) -> Result<Integral>
where
    F1: Fn(f64) -> f64,
    F2: Fn(f64) -> f64,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(domain("w1_cdf needs a finite interval; truncate infinite supports first"));
    }
    if a >= b {
        return Err(domain(format!("w1_cdf needs a < b, got [{a}, {b}]")));
    }
    integrate_pieces(|x| (f1(x) - f2(x)).abs(), &[a, b], tol)
}

/// `∫ |Q₁(u) - Q₂(u)| du` over `[1e-9, 1 - 1e-9]`.
pub fn w1_quantile<Q1, Q2>(q1: Q1, q2: Q2, tol: Tolerance) -> Result<Integral>
where
    Q1: Fn(f64) -> f64,
    Q2: Fn(f64) -> f64,
{
    integrate_pieces(|u| (q1(u) - q2(u)).abs(), &U_BREAKS, tol)
}

/// `(∫ |Q₁(u) - Q₂(u)|^p du)^(1/p)` over `[1e-9, 1 - 1e-9]`, for `p >= 1`.
pub fn wp_quantile<Q1, Q2>(p: f64, q1: Q1, q2: Q2, tol: Tolerance) -> Result<Integral>
where
    Q1: Fn(f64) -> f64,
    Q2: Fn(f64) -> f64,
{
    if !(p >= 1.0 && p.is_finite()) {
        return Err(domain(format!("order p must be finite and >= 1, got {p}")));
    }
    if p == 1.0 {
        return w1_quantile(q1, q2, tol);
    }
    let r = integrate_pieces(|u| (q1(u) - q2(u)).abs().powf(p), &U_BREAKS, tol)?;
    let value = r.value.max(0.0).powf(1.0 / p);
    let error = if value > 0.0 {
        r.error / (p * value.powf(p - 1.0))
    } else {
        r.error.powf(1.0 / p)
    };
    Ok(Integral { value, error })
}

fn require_continuous(d: &Distribution) -> Result<()> {
    if d.is_discrete() {
        return Err(WimError::Unsupported(format!(
            "closed-form distances need continuous laws, got {:?}",
            d.family()
        )));
    }
    Ok(())
}

/// W₁ between two continuous laws by the cdf route.
///
/// Infinite supports are truncated at the `1e-9` and `1 - 1e-9` quantiles;
/// `2e-9` times the truncated width is added to the error bound.
pub fn w1_distributions(d1: &Distribution, d2: &Distribution) -> Result<Integral> {
    require_continuous(d1)?;
    require_continuous(d2)?;
    let (a1, b1) = d1.effective_range()?;
    let (a2, b2) = d2.effective_range()?;
    let lo = a1.min(a2);
    let hi = b1.max(b2);
    if lo >= hi {
        return Ok(Integral { value: 0.0, error: 0.0 });
    }
    let mut breaks = vec![lo, hi];
    for d in [d1, d2] {
        for u in [1e-3, 0.5, 1.0 - 1e-3] {
            let x = d.quantile(u)?;
            if x > lo && x < hi {
                breaks.push(x);
            }
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let r = integrate_pieces(|x| (d1.cdf(x) - d2.cdf(x)).abs(), &breaks, W_TOLERANCE)?;
    let (s1, s2) = (d1.support(), d2.support());
    let truncated = !(s1.0.is_finite() && s2.0.is_finite() && s1.1.is_finite() && s2.1.is_finite());
    let tail = if truncated { 2.0 * TAIL * (hi - lo) } else { 0.0 };
    Ok(Integral {
        value: r.value,
        error: r.error + tail,
    })
}

/// W_p between two continuous laws by the quantile route with exact quantiles.
pub fn wp_distributions(p: f64, d1: &Distribution, d2: &Distribution) -> Result<Integral> {
    require_continuous(d1)?;
    require_continuous(d2)?;
    let q1 = |u: f64| d1.quantile(u).unwrap_or(f64::NAN);
    let q2 = |u: f64| d2.quantile(u).unwrap_or(f64::NAN);
    wp_quantile(p, q1, q2, W_TOLERANCE)
}

/// W_p between two tabulated inverse cdfs; much cheaper than
/// [`wp_distributions`] when the same laws are compared repeatedly.
pub fn wp_tables(p: f64, t1: &InverseCdf, t2: &InverseCdf, tol: Tolerance) -> Result<Integral> {
    wp_quantile(p, |u| t1.eval(u), |u| t2.eval(u), tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn normal_location_shift() {
        let a = Distribution::normal(0.0, 1.0).unwrap();
        let b = Distribution::normal(0.5, 1.0).unwrap();
        let w = w1_distributions(&a, &b).unwrap();
        assert_relative_eq!(w.value, 0.5, epsilon = 1e-8);
        assert!(w1_distributions(&a, &a).unwrap().value.abs() < 1e-15);
    }

    #[test]
    fn uniform_intervals() {
        // Q1(u) = u, Q2(u) = 2u: W1 = ∫ u du = 1/2, W2 = (∫ u² du)^(1/2) = 1/√3.
        let a = Distribution::uniform(0.0, 1.0).unwrap();
        let b = Distribution::uniform(0.0, 2.0).unwrap();
        assert_relative_eq!(w1_distributions(&a, &b).unwrap().value, 0.5, epsilon = 1e-12);
        assert_relative_eq!(
            wp_distributions(2.0, &a, &b).unwrap().value,
            1.0 / 3f64.sqrt(),
            epsilon = 1e-8
        );
    }

    #[test]
    fn gaussian_w2_closed_form() {
        // W2² between normals = (μ1-μ2)² + (σ1-σ2)².
        let a = Distribution::normal(1.0, 2.0).unwrap();
        let b = Distribution::normal(-0.5, 0.7).unwrap();
        let w = wp_distributions(2.0, &a, &b).unwrap().value;
        assert_relative_eq!(w, (1.5f64 * 1.5 + 1.3 * 1.3).sqrt(), max_relative = 1e-7);
    }

    #[test]
    fn cdf_and_quantile_routes_agree() {
        let a = Distribution::gamma(4.0, 2.0).unwrap();
        let b = Distribution::gamma(7.0, 3.0).unwrap();
        let c = w1_distributions(&a, &b).unwrap().value;
        let q = w1_quantile(
            |u| a.quantile(u).unwrap(),
            |u| b.quantile(u).unwrap(),
            W_TOLERANCE,
        )
        .unwrap()
        .value;
        assert_relative_eq!(c, q, epsilon = 1e-8);
    }

    #[test]
    fn argument_errors() {
        let a = Distribution::normal(0.0, 1.0).unwrap();
        assert!(w1_cdf(|x| a.cdf(x), |x| a.cdf(x), f64::NEG_INFINITY, 0.0, W_TOLERANCE).is_err());
        assert!(w1_cdf(|x| a.cdf(x), |x| a.cdf(x), 1.0, 0.0, W_TOLERANCE).is_err());
        assert!(wp_quantile(0.5, |u| u, |u| u, W_TOLERANCE).is_err());
        let p = Distribution::poisson(2.0).unwrap();
        assert!(matches!(w1_distributions(&a, &p), Err(WimError::Unsupported(_))));
    }
}
