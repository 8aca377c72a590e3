//! Globally adaptive Gauss–Kronrod (7/15) quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{domain, Result, WimError};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Stopping rule for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    /// Largest number of subintervals before giving up.
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs: 1e-10,
            rel: 1e-10,
            max_intervals: 4000,
        }
    }
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Tolerance {
            abs,
            rel,
            ..Tolerance::default()
        }
    }
}

/// Value of an integral with its estimated absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Result<Piece> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    if !fc.is_finite() {
        return Err(domain(format!("integrand is not finite at {center}")));
    }
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        if !f1.is_finite() || !f2.is_finite() {
            let x = if f1.is_finite() { center + dx } else { center - dx };
            return Err(domain(format!("integrand is not finite at {x}")));
        }
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok(Piece { a, b, value, error })
}

/// Integrates `f` over the finite interval `[a, b]`.
///
/// Fails with [`WimError::Integration`] when the subdivision budget runs out
/// before the error estimate meets `max(tol.abs, tol.rel * |value|)`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<Integral> {
    integrate_pieces(&mut f, &[a, b], tol)
}

/// Integrates over consecutive intervals between `breakpoints`, which must be
/// finite and non-decreasing. Known kinks of the integrand should be listed.
pub fn integrate_pieces<F: FnMut(f64) -> f64>(
    mut f: F,
    breakpoints: &[f64],
    tol: Tolerance,
) -> Result<Integral> {
    if breakpoints.len() < 2 {
        return Err(domain("integration needs at least two breakpoints"));
    }
    if breakpoints.iter().any(|x| !x.is_finite()) {
        return Err(domain("integration limits must be finite"));
    }
    if breakpoints.windows(2).any(|w| w[1] < w[0]) {
        return Err(domain("integration breakpoints must be non-decreasing"));
    }
    let mut heap = BinaryHeap::new();
    for w in breakpoints.windows(2) {
        if w[1] > w[0] {
            heap.push(kronrod(&mut f, w[0], w[1])?);
        }
    }
    let total = |h: &BinaryHeap<Piece>| -> (f64, f64) {
        h.iter().fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error))
    };
    let (mut value, mut error) = total(&heap);
    let mut settled_value = 0.0;
    let mut settled_error = 0.0;
    loop {
        if error <= tol.abs.max(tol.rel * value.abs()) {
            break;
        }
        if heap.len() >= tol.max_intervals {
            return Err(WimError::Integration {
                estimate: value,
                error,
                requested: tol.abs.max(tol.rel * value.abs()),
            });
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval can no longer be split in floating point.
            settled_value += worst.value;
            settled_error += worst.error;
            if heap.is_empty() {
                break;
            }
            continue;
        }
        let left = kronrod(&mut f, worst.a, mid)?;
        let right = kronrod(&mut f, mid, worst.b)?;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        if heap.len() % 64 == 0 {
            // Refresh running sums to stop drift from repeated updates.
            let (v, e) = total(&heap);
            value = v + settled_value;
            error = e + settled_error;
        }
    }
    let (v, e) = total(&heap);
    let value = v + settled_value;
    let error = e + settled_error;
    if error > tol.abs.max(tol.rel * value.abs()) {
        return Err(WimError::Integration {
            estimate: value,
            error,
            requested: tol.abs.max(tol.rel * value.abs()),
        });
    }
    Ok(Integral { value, error })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn weights_sum_to_two() {
        let k: f64 = WGK[7] + 2.0 * WGK[..7].iter().sum::<f64>();
        let g: f64 = WG[3] + 2.0 * WG[..3].iter().sum::<f64>();
        assert_relative_eq!(k, 2.0, epsilon = 1e-15);
        assert_relative_eq!(g, 2.0, epsilon = 1e-15);
    }

    #[test]
    fn single_rule_exact_for_high_degree_polynomials() {
        // Kronrod 15 integrates degree 22 exactly; x^22 over [-1,1] = 2/23.
        let p = kronrod(&mut |x: f64| x.powi(22), -1.0, 1.0).unwrap();
        assert_relative_eq!(p.value, 2.0 / 23.0, max_relative = 1e-13);
    }

    #[test]
    fn smooth_integrals() {
        let tol = Tolerance::default();
        let r = integrate(|x: f64| x.sin(), 0.0, std::f64::consts::PI, tol).unwrap();
        assert_relative_eq!(r.value, 2.0, epsilon = 1e-12);
        let r = integrate(|x: f64| (-x * x).exp(), -8.0, 8.0, tol).unwrap();
        assert_relative_eq!(r.value, std::f64::consts::PI.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn kink_and_endpoint_singularity() {
        let tol = Tolerance::default();
        let r = integrate(|x: f64| (x - 0.3).abs(), 0.0, 1.0, tol).unwrap();
        assert_relative_eq!(r.value, 0.5 * (0.09 + 0.49), epsilon = 1e-12);
        let r = integrate(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, tol).unwrap();
        assert_relative_eq!(r.value, 2.0, epsilon = 1e-9);
    }

    #[test]
    fn breakpoints_and_errors() {
        let tol = Tolerance::default();
        let r = integrate_pieces(|x: f64| if x < 1.0 { 1.0 } else { 3.0 }, &[0.0, 1.0, 2.0], tol).unwrap();
        assert_relative_eq!(r.value, 4.0, epsilon = 1e-12);
        assert!(integrate(|_| f64::NAN, 0.0, 1.0, tol).is_err());
        assert!(integrate(|x| x, 0.0, f64::INFINITY, tol).is_err());
        let tight = Tolerance { abs: 1e-15, rel: 0.0, max_intervals: 3 };
        assert!(matches!(
            integrate(|x: f64| (1.0 / x).sin(), 1e-6, 1.0, tight),
            Err(WimError::Integration { .. })
        ));
    }
}
