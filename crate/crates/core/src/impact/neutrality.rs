use serde::Serialize;

use crate::error::{domain, Result, WimError};
use crate::posterior::{BayesModel, Likelihood, Posterior};
use crate::sampler::logistic_mle;

/// Maximum likelihood estimate of the model parameter.
pub fn mle(model: &BayesModel) -> Result<Vec<f64>> {
    let data = &model.data;
    model.likelihood.check_data(data)?;
    if data.is_empty() {
        return Err(domain("the MLE needs at least one observation"));
    }
    let n = data.len() as f64;
    match &model.likelihood {
        Likelihood::PoissonIid => Ok(vec![data.iter().sum::<f64>() / n]),
        Likelihood::BinomialCount { trials } => Ok(vec![data.iter().sum::<f64>() / (n * *trials as f64)]),
        Likelihood::NormalKnownMean { mean } => {
            Ok(vec![data.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n])
        }
        Likelihood::LogisticDoseResponse { doses, trials } => Ok(logistic_mle(doses, trials, data)?.to_vec()),
        Likelihood::SkewNormalFull => Err(WimError::Unsupported(
            "the skew-normal skewness MLE can be infinite".into(),
        )),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Neutrality {
    /// Posterior probability strictly below the MLE.
    pub value: f64,
    /// The MLE sits on (or outside) the edge of the posterior support, where
    /// the measure is not informative.
    pub degenerate: bool,
}

/// `P(Θ < mle)` under a scalar posterior.
pub fn neutrality(post: &Posterior, mle: f64) -> Result<Neutrality> {
    if !mle.is_finite() {
        return Err(domain(format!("MLE must be finite, got {mle}")));
    }
    match post {
        Posterior::Analytic(d) => {
            let (lo, hi) = d.support();
            Ok(Neutrality {
                value: d.cdf(mle).clamp(0.0, 1.0),
                degenerate: mle <= lo || mle >= hi,
            })
        }
        Posterior::Sampled { cloud, .. } => {
            if cloud.dim() != 1 {
                return Err(WimError::DimensionMismatch {
                    left: 1,
                    right: cloud.dim(),
                });
            }
            let xs = cloud.as_slice();
            let below = xs.iter().filter(|&&x| x < mle).count();
            let (min, max) = xs
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
            Ok(Neutrality {
                value: below as f64 / xs.len() as f64,
                degenerate: mle <= min || mle >= max,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::Distribution;
    use crate::posterior::PriorSpec;
    use crate::transport::EmpiricalMeasure;

    #[test]
    fn mle_examples() {
        let m = BayesModel::new(Likelihood::PoissonIid, vec![4.0, 6.0], PriorSpec::Flat).unwrap();
        assert_eq!(mle(&m).unwrap(), vec![5.0]);
        let m = BayesModel::new(Likelihood::BinomialCount { trials: 10 }, vec![7.0], PriorSpec::Flat).unwrap();
        assert_eq!(mle(&m).unwrap(), vec![0.7]);
        let m = BayesModel::new(
            Likelihood::NormalKnownMean { mean: 0.0 },
            vec![1.0, -1.0, 2.0, -2.0],
            PriorSpec::JeffreysVariance,
        )
        .unwrap();
        assert_eq!(mle(&m).unwrap(), vec![2.5]);
        let m = BayesModel::new(Likelihood::SkewNormalFull, vec![1.0, 2.0], PriorSpec::Flat).unwrap();
        assert!(matches!(mle(&m), Err(WimError::Unsupported(_))));
    }

    #[test]
    fn symmetric_posterior_is_neutral() {
        let p = Posterior::Analytic(Distribution::beta(6.0, 6.0).unwrap());
        let n = neutrality(&p, 0.5).unwrap();
        assert!((n.value - 0.5).abs() <= 1e-12);
        assert!(!n.degenerate);
    }

    #[test]
    fn boundary_mle() {
        let p = Posterior::Analytic(Distribution::gamma(0.5, 10.0).unwrap());
        let n = neutrality(&p, 0.0).unwrap();
        assert_eq!(n.value, 0.0);
        assert!(n.degenerate);
    }

    #[test]
    fn sampled_counts_strictly_below() {
        let cloud = EmpiricalMeasure::from_1d(vec![1.0, 2.0, 2.0, 3.0]).unwrap();
        let p = Posterior::Sampled { cloud, diagnostics: None };
        let n = neutrality(&p, 2.0).unwrap();
        assert_eq!(n.value, 0.25);
        assert!(!n.degenerate);
    }
}
