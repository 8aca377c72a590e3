//! Wasserstein distances.
//!
//! [`exact1d`] holds the closed-form 1-D routes (cdf and quantile integrals),
//! [`empirical`] the distances between point clouds.

pub mod empirical;
pub mod exact1d;
mod simplex;

pub use empirical::{subsampled_wp, w1_empirical_1d, wp_empirical, wp_empirical_1d, SubsampledDistance, MAX_CELLS};
pub use exact1d::{w1_cdf, w1_distributions, w1_quantile, wp_distributions, wp_quantile, wp_tables, W_TOLERANCE};

use serde::Serialize;

use crate::error::{invalid, Result, WimError};

/// Uniformly weighted points in `R^d`, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalMeasure {
    points: Vec<f64>,
    dim: usize,
}

impl EmpiricalMeasure {
    pub fn new(points: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dimension must be positive"));
        }
        if points.is_empty() || points.len() % dim != 0 {
            return Err(invalid(format!(
                "{} coordinates do not form a non-empty set of {dim}-dimensional points",
                points.len()
            )));
        }
        if points.iter().any(|x| !x.is_finite()) {
            return Err(invalid("points must be finite"));
        }
        Ok(EmpiricalMeasure { points, dim })
    }

    pub fn from_1d(points: Vec<f64>) -> Result<Self> {
        Self::new(points, 1)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map(Vec::len).unwrap_or(0);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(invalid("all points must have the same dimension"));
        }
        Self::new(rows.concat(), dim)
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.points
    }

    /// The `j`-th coordinate of every point.
    pub fn coordinate(&self, j: usize) -> Result<Vec<f64>> {
        if j >= self.dim {
            return Err(WimError::DimensionMismatch { left: j + 1, right: self.dim });
        }
        Ok(self.points.iter().skip(j).step_by(self.dim).copied().collect())
    }

    /// Marginal cloud of coordinate `j`.
    pub fn marginal(&self, j: usize) -> Result<EmpiricalMeasure> {
        EmpiricalMeasure::from_1d(self.coordinate(j)?)
    }

    /// The points at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> EmpiricalMeasure {
        let mut pts = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            pts.extend_from_slice(self.point(i));
        }
        EmpiricalMeasure { points: pts, dim: self.dim }
    }

    pub fn mean(&self) -> Vec<f64> {
        let n = self.len() as f64;
        (0..self.dim)
            .map(|j| self.points.iter().skip(j).step_by(self.dim).sum::<f64>() / n)
            .collect()
    }
}

/// Optimal coupling: `(i, j, mass)` triples and the total cost.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransportPlan {
    pub pairs: Vec<(usize, usize, f64)>,
    pub cost: f64,
}
