//! Prior impact measurement with Wasserstein distances.
//!
//! Two posteriors fitted to the same data under two different priors are
//! compared by their 1-Wasserstein distance (the WIM). Around that value the
//! crate provides analytic lower/upper bounds built from Stein kernels, the
//! Neutrality and MOPESS measures, bootstrap uncertainty and the samplers
//! needed for non-conjugate models.
//!
//! Modules, bottom up:
//!
//! - [`numeric`]: adaptive quadrature, bracketed root finding, normal helpers.
//! - [`distributions`]: the univariate families used as priors, posteriors
//!   and likelihoods.
//! - [`posterior`]: Bayesian models, conjugate updates, predictive draws.
//! - [`transport`]: 1-D closed-form and empirical Wasserstein distances plus
//!   an exact network-simplex solver for small multivariate clouds.
//! - [`bounds`]: Stein kernels and the WIM bounds.
//! - [`impact`]: WIM, Neutrality, MOPESS and bootstrap.
//! - [`sampler`]: adaptive Metropolis and the two non-conjugate model fits.
//!
//! ```
//! use wim_core::distributions::Distribution;
//! use wim_core::transport::w1_distributions;
//!
//! let a = Distribution::normal(0.0, 1.0).unwrap();
//! let b = Distribution::normal(0.5, 1.0).unwrap();
//! let w = w1_distributions(&a, &b).unwrap();
//! assert!((w.value - 0.5).abs() < 1e-8);
//! ```

pub mod bounds;
pub mod distributions;
pub mod error;
pub mod impact;
pub mod numeric;
pub mod posterior;
pub mod rng;
pub mod sampler;
pub mod transport;

pub use error::{Result, WimError};
