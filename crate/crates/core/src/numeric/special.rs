//! Standard normal helpers and re-exported special functions.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

pub use statrs::function::beta::{beta_reg, ln_beta};
pub use statrs::function::gamma::{gamma_lr, gamma_ur, ln_gamma};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

pub fn norm_pdf(z: f64) -> f64 {
    (-0.5 * z * z - LN_SQRT_2PI).exp()
}

pub fn ln_norm_pdf(z: f64) -> f64 {
    -0.5 * z * z - LN_SQRT_2PI
}

pub fn norm_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

/// log Φ(z), accurate far into the lower tail.
pub fn ln_norm_cdf(z: f64) -> f64 {
    if z > 0.0 {
        (-norm_cdf(-z)).ln_1p()
    } else if z > -30.0 {
        norm_cdf(z).ln()
    } else {
        // Asymptotic expansion of the Mills ratio.
        let r = 1.0 / (z * z);
        let series = 1.0 - r * (1.0 - 3.0 * r * (1.0 - 5.0 * r * (1.0 - 7.0 * r)));
        ln_norm_pdf(z) - (-z).ln() + series.ln()
    }
}

/// Φ⁻¹(u) for u in (0, 1); ±∞ at the ends.
pub fn norm_quantile(u: f64) -> f64 {
    if u <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if u >= 1.0 {
        return f64::INFINITY;
    }
    let mut z = -SQRT_2 * statrs::function::erf::erfc_inv(2.0 * u);
    // One Halley step against the accurate cdf.
    if z.is_finite() {
        let e = if u < 0.5 { norm_cdf(z) - u } else { (1.0 - u) - norm_cdf(-z) };
        let t = e / norm_pdf(z);
        if t.is_finite() {
            z -= t / (1.0 + 0.5 * z * t);
        }
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cdf_reference_values() {
        assert_relative_eq!(norm_cdf(0.0), 0.5, epsilon = 1e-16);
        assert_relative_eq!(norm_cdf(1.959963984540054), 0.975, epsilon = 1e-15);
        // Φ(-10) = 7.619853024160527e-24
        assert_relative_eq!(norm_cdf(-10.0), 7.619853024160527e-24, max_relative = 1e-12);
    }

    #[test]
    fn log_cdf_is_continuous_at_the_switch() {
        let a = ln_norm_cdf(-30.0 + 1e-9);
        let b = ln_norm_cdf(-30.0 - 1e-9);
        assert!((a - b).abs() < 1e-6);
        assert_relative_eq!(ln_norm_cdf(3.0), norm_cdf(3.0).ln(), max_relative = 1e-14);
        assert!(ln_norm_cdf(-200.0).is_finite());
    }

    #[test]
    fn quantile_inverts_cdf() {
        for &u in &[1e-12, 1e-6, 0.01, 0.3, 0.5, 0.77, 0.999, 1.0 - 1e-10] {
            assert_relative_eq!(norm_cdf(norm_quantile(u)), u, max_relative = 1e-12);
        }
    }
}
