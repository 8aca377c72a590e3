//! Wasserstein distances between point clouds.

use rand::Rng;
use serde::Serialize;

use super::simplex;
use super::{EmpiricalMeasure, TransportPlan};
use crate::error::{domain, invalid, Result, WimError};

/// Largest `n * m` cost matrix the exact solver accepts.
pub const MAX_CELLS: usize = 4_000_000;

fn sorted(xs: &[f64]) -> Result<Vec<f64>> {
    if xs.is_empty() {
        return Err(invalid("empirical distance needs non-empty samples"));
    }
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(invalid("samples must be finite"));
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// `W_p` between two 1-D samples through their empirical quantile functions.
///
/// Equal sizes pair order statistics; unequal sizes integrate the two
/// piecewise-constant quantile functions exactly over the merged breakpoints.
pub fn wp_empirical_1d(p: f64, a: &[f64], b: &[f64]) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(domain(format!("order p must be finite and >= 1, got {p}")));
    }
    let a = sorted(a)?;
    let b = sorted(b)?;
    let cost = |x: f64| if p == 1.0 { x.abs() } else { x.abs().powf(p) };
    let (n, m) = (a.len(), b.len());
    let total = if n == m {
        a.iter().zip(&b).map(|(x, y)| cost(x - y)).sum::<f64>() / n as f64
    } else {
        // Level i/n sits at position i*m on the common grid of step 1/(n m).
        let (mut i, mut j) = (0usize, 0usize);
        let mut pos = 0usize;
        let mut acc = 0.0;
        while i < n && j < m {
            let next_a = (i + 1) * m;
            let next_b = (j + 1) * n;
            let next = next_a.min(next_b);
            acc += (next - pos) as f64 * cost(a[i] - b[j]);
            pos = next;
            if next_a == next {
                i += 1;
            }
            if next_b == next {
                j += 1;
            }
        }
        acc / (n * m) as f64
    };
    Ok(if p == 1.0 { total } else { total.powf(1.0 / p) })
}

/// `W₁` between two 1-D samples.
pub fn w1_empirical_1d(a: &[f64], b: &[f64]) -> Result<f64> {
    wp_empirical_1d(1.0, a, b)
}

fn check_pair(a: &EmpiricalMeasure, b: &EmpiricalMeasure) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(WimError::DimensionMismatch { left: a.dim(), right: b.dim() });
    }
    Ok(())
}

/// Exact `W_p` between two uniformly weighted clouds under the Euclidean
/// ground metric, with the optimal plan.
///
/// Fails with [`WimError::Capacity`] when `n * m` exceeds [`MAX_CELLS`].
pub fn wp_empirical(p: f64, a: &EmpiricalMeasure, b: &EmpiricalMeasure) -> Result<(f64, TransportPlan)> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(domain(format!("order p must be finite and >= 1, got {p}")));
    }
    check_pair(a, b)?;
    let (n, m) = (a.len(), b.len());
    let cells = n.checked_mul(m).unwrap_or(usize::MAX);
    if cells > MAX_CELLS {
        return Err(WimError::Capacity { cells, cap: MAX_CELLS });
    }
    let mut cost = Vec::with_capacity(cells);
    for i in 0..n {
        let x = a.point(i);
        for j in 0..m {
            let y = b.point(j);
            let d2: f64 = x.iter().zip(y).map(|(s, t)| (s - t) * (s - t)).sum();
            cost.push(if p == 2.0 { d2 } else { d2.sqrt().powf(p) });
        }
    }
    let sol = simplex::solve(n, m, &cost)?;
    let value = sol.cost.max(0.0).powf(1.0 / p);
    Ok((
        value,
        TransportPlan {
            pairs: sol.flows,
            cost: sol.cost,
        },
    ))
}

/// Mean and spread of `W_p` over repeated subsamples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubsampledDistance {
    pub mean: f64,
    /// Sample standard deviation across repeats (0 for a single repeat).
    pub sd: f64,
    pub repeats: usize,
}

/// `W_p` averaged over `r` random size-`k` subsamples (without replacement)
/// of each cloud. A cloud with at most `k` points is used whole.
pub fn subsampled_wp<R: Rng + ?Sized>(
    p: f64,
    a: &EmpiricalMeasure,
    b: &EmpiricalMeasure,
    k: usize,
    r: usize,
    rng: &mut R,
) -> Result<SubsampledDistance> {
    check_pair(a, b)?;
    if k == 0 || r == 0 {
        return Err(invalid("subsample size and repeat count must be positive"));
    }
    let pick = |cloud: &EmpiricalMeasure, rng: &mut R| -> EmpiricalMeasure {
        if cloud.len() <= k {
            cloud.clone()
        } else {
            let mut idx = rand::seq::index::sample(rng, cloud.len(), k).into_vec();
            idx.sort_unstable();
            cloud.select(&idx)
        }
    };
    let mut values = Vec::with_capacity(r);
    for _ in 0..r {
        let sa = pick(a, rng);
        let sb = pick(b, rng);
        let w = if sa.dim() == 1 {
            wp_empirical_1d(p, sa.as_slice(), sb.as_slice())?
        } else {
            wp_empirical(p, &sa, &sb)?.0
        };
        values.push(w);
    }
    let mean = values.iter().sum::<f64>() / r as f64;
    let sd = if r > 1 {
        (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (r - 1) as f64).sqrt()
    } else {
        0.0
    };
    Ok(SubsampledDistance { mean, sd, repeats: r })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn spec_style_examples() {
        assert_relative_eq!(w1_empirical_1d(&[0.0, 1.0], &[0.5, 1.5]).unwrap(), 0.5, epsilon = 1e-15);
        assert_relative_eq!(w1_empirical_1d(&[3.0, 1.0, 2.0], &[2.0, 3.0, 1.0]).unwrap(), 0.0);
        assert!(w1_empirical_1d(&[], &[1.0]).is_err());
    }

    #[test]
    fn unequal_sizes_match_replicated_sample() {
        // Repeating each point m times (resp. n times) gives equal sizes with the same law.
        let a = [0.3, -1.0, 2.5];
        let b = [0.0, 1.0, 4.0, -2.0, 0.5];
        let ra: Vec<f64> = a.iter().flat_map(|x| std::iter::repeat(*x).take(5)).collect();
        let rb: Vec<f64> = b.iter().flat_map(|x| std::iter::repeat(*x).take(3)).collect();
        for p in [1.0, 2.0, 3.0] {
            assert_relative_eq!(
                wp_empirical_1d(p, &a, &b).unwrap(),
                wp_empirical_1d(p, &ra, &rb).unwrap(),
                epsilon = 1e-13
            );
        }
    }

    #[test]
    fn simplex_matches_sorting_in_one_dimension() {
        let a = EmpiricalMeasure::from_1d(vec![0.1, 2.0, -0.7, 1.1]).unwrap();
        let b = EmpiricalMeasure::from_1d(vec![0.0, -0.2, 3.0, 0.9, 1.4, 0.2]).unwrap();
        let (w, plan) = wp_empirical(1.0, &a, &b).unwrap();
        assert_relative_eq!(w, w1_empirical_1d(a.as_slice(), b.as_slice()).unwrap(), epsilon = 1e-12);
        let mass: f64 = plan.pairs.iter().map(|p| p.2).sum();
        assert_relative_eq!(mass, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn capacity_and_dimension_errors() {
        let a = EmpiricalMeasure::from_1d(vec![0.0; 2001]).unwrap();
        let b = EmpiricalMeasure::from_1d(vec![0.0; 2000]).unwrap();
        assert!(matches!(wp_empirical(1.0, &a, &b), Err(WimError::Capacity { .. })));
        let c = EmpiricalMeasure::new(vec![0.0, 1.0], 2).unwrap();
        assert!(matches!(wp_empirical(1.0, &b, &c), Err(WimError::DimensionMismatch { .. })));
    }

    #[test]
    fn full_subsample_reproduces_exact_value() {
        let mut rng = crate::rng::stream(1);
        let a = EmpiricalMeasure::new((0..40).map(|i| (i as f64 * 0.37).sin()).collect(), 2).unwrap();
        let b = EmpiricalMeasure::new((0..40).map(|i| (i as f64 * 0.11).cos()).collect(), 2).unwrap();
        let exact = wp_empirical(1.0, &a, &b).unwrap().0;
        let s = subsampled_wp(1.0, &a, &b, 20, 3, &mut rng).unwrap();
        assert_eq!(s.mean, exact);
        assert_eq!(s.sd, 0.0);
    }
}
