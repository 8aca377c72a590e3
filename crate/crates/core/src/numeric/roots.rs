//! Bracketed scalar root finding.

use crate::error::{Result, WimError};

/// Brent's method on a sign-changing bracket `[a, b]`.
///
/// Stops when the bracket is narrower than `xtol` (plus a few ulps of the
/// iterate) or an exact zero is hit.
pub fn brent<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, xtol: f64) -> Result<f64> {
    let (mut a, mut b) = (a, b);
    let mut fa = f(a);
    let mut fb = f(b);
    if fa.is_nan() || fb.is_nan() {
        return Err(WimError::RootFinding(format!("function is NaN at the bracket [{a}, {b}]")));
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(WimError::RootFinding(format!("no sign change on [{a}, {b}]")));
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..300 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
        if fb.is_nan() {
            return Err(WimError::RootFinding(format!("function is NaN at {b}")));
        }
    }
    Err(WimError::RootFinding("Brent iteration limit reached".into()))
}

/// Grows `[lo, hi]` geometrically until `f` changes sign, staying inside
/// `[min, max]`. Returns the sign-changing bracket.
pub fn expand_bracket<F: FnMut(f64) -> f64>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    min: f64,
    max: f64,
) -> Result<(f64, f64)> {
    let mut flo = f(lo);
    let mut fhi = f(hi);
    for _ in 0..200 {
        if flo.signum() != fhi.signum() || flo == 0.0 || fhi == 0.0 {
            return Ok((lo, hi));
        }
        let width = (hi - lo).max(1e-12 * (1.0 + lo.abs().max(hi.abs())));
        // Move the end whose value is closer to zero; it is probably nearer the root.
        if flo.abs() < fhi.abs() {
            if lo <= min {
                break;
            }
            lo = (lo - width).max(min);
            flo = f(lo);
        } else {
            if hi >= max {
                break;
            }
            hi = (hi + width).min(max);
            fhi = f(hi);
        }
    }
    if flo.signum() != fhi.signum() {
        return Ok((lo, hi));
    }
    Err(WimError::RootFinding(format!("could not bracket a root within [{min}, {max}]")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_simple_roots() {
        let r = brent(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
        let r = brent(|x: f64| x.cos() - x, 0.0, 1.0, 1e-14).unwrap();
        assert!((r.cos() - r).abs() < 1e-13);
    }

    #[test]
    fn rejects_bad_brackets() {
        assert!(brent(|x| x * x + 1.0, -1.0, 1.0, 1e-12).is_err());
    }

    #[test]
    fn expands_to_a_bracket() {
        let (lo, hi) = expand_bracket(|x| x - 100.0, 0.0, 1.0, f64::NEG_INFINITY, f64::INFINITY).unwrap();
        assert!(lo <= 100.0 && hi >= 100.0);
        assert!(expand_bracket(|x| x - 100.0, 0.0, 1.0, 0.0, 10.0).is_err());
    }
}
