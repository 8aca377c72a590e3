//! The two non-conjugate applications: skewness of a skew-normal sample
//! under six priors, and a logistic dose-response model under a flat and
//! three Cauchy priors.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use wim_core::distributions::Distribution;
use wim_core::impact::{resample_indices, wim, BootstrapConfig, BootstrapReport, WimConfig};
use wim_core::posterior::{Posterior, PriorSpec};
use wim_core::rng::{child_seed, child_stream};
use wim_core::sampler::{fit_logistic, fit_skew_normal, LogisticPrior};
use wim_core::transport::EmpiricalMeasure;
use wim_core::Result;

use crate::data::{bioassay, DoseResponse};
use crate::output::{CsvRecord, Field};
use crate::spec::{ExperimentSpec, Kind};

pub const DEMO_SCHEMA: &str = "wim-demo v1";
pub const CLOUD_SCHEMA: &str = "wim-clouds v1";

/// Skewness priors of the skew-normal demo, by name.
pub fn skewness_priors() -> Vec<(&'static str, PriorSpec)> {
    let t = |a, b, c| PriorSpec::Proper(Distribution::student_t(a, b, c).expect("valid"));
    vec![
        ("uniform", PriorSpec::Flat),
        // Tractable approximation of the Jeffreys prior.
        ("jeffreys", t(0.0, PI * PI / 4.0, 0.5)),
        ("bayes-laplace", t(0.0, 0.5, 2.0)),
        ("btv", t(0.0, 0.92, 1.0)),
        ("normal", PriorSpec::Proper(Distribution::normal(0.0, 5f64.sqrt()).expect("valid"))),
        (
            "skewnormal",
            PriorSpec::Proper(Distribution::skew_normal(0.0, 5f64.sqrt(), 2.0).expect("valid")),
        ),
    ]
}

/// Priors of the bioassay demo, by name.
pub fn logistic_priors() -> Vec<(&'static str, LogisticPrior)> {
    vec![
        ("uniform", LogisticPrior::FlatPlane),
        ("cauchy-2.5", LogisticPrior::Cauchy { slope_scale: 2.5 }),
        ("cauchy-5", LogisticPrior::Cauchy { slope_scale: 5.0 }),
        ("cauchy-10", LogisticPrior::Cauchy { slope_scale: 10.0 }),
    ]
}

/// One entry of a pairwise WIM matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoRow {
    pub experiment: String,
    pub run: usize,
    pub seed: u64,
    pub prior1: String,
    pub prior2: String,
    /// `alpha` for the skew-normal demo; `joint`, `beta0`, `beta1` or `ld50`
    /// for the bioassay demo.
    pub quantity: String,
    pub wim: Option<f64>,
    pub wim_se: Option<f64>,
    pub boot_resamples: Option<usize>,
    pub boot_excluded: Option<usize>,
    pub boot_median: Option<f64>,
    pub boot_q1: Option<f64>,
    pub boot_q3: Option<f64>,
    pub boot_lo: Option<f64>,
    pub boot_hi: Option<f64>,
    pub error: Option<String>,
}

impl CsvRecord for DemoRow {
    const HEADER: &'static [&'static str] = &[
        "experiment",
        "run",
        "seed",
        "prior1",
        "prior2",
        "quantity",
        "wim",
        "wim_se",
        "boot_resamples",
        "boot_excluded",
        "boot_median",
        "boot_q1",
        "boot_q3",
        "boot_lo",
        "boot_hi",
        "error",
    ];

    fn fields(&self) -> Vec<Field<'_>> {
        let count = |c: Option<usize>| match c {
            Some(v) => Field::Int(v as u64),
            None => Field::Text(""),
        };
        vec![
            Field::Text(&self.experiment),
            Field::Int(self.run as u64),
            Field::Int(self.seed),
            Field::Text(&self.prior1),
            Field::Text(&self.prior2),
            Field::Text(&self.quantity),
            Field::Float(self.wim),
            Field::Float(self.wim_se),
            count(self.boot_resamples),
            count(self.boot_excluded),
            Field::Float(self.boot_median),
            Field::Float(self.boot_q1),
            Field::Float(self.boot_q3),
            Field::Float(self.boot_lo),
            Field::Float(self.boot_hi),
            Field::Text(self.error.as_deref().unwrap_or("")),
        ]
    }
}

/// Posterior draws of one prior in one run, long format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CloudRow {
    pub run: usize,
    pub prior: String,
    pub quantity: String,
    pub draw: usize,
    pub value: f64,
}

impl CsvRecord for CloudRow {
    const HEADER: &'static [&'static str] = &["run", "prior", "quantity", "draw", "value"];

    fn fields(&self) -> Vec<Field<'_>> {
        vec![
            Field::Int(self.run as u64),
            Field::Text(&self.prior),
            Field::Text(&self.quantity),
            Field::Int(self.draw as u64),
            Field::Float(Some(self.value)),
        ]
    }
}

#[derive(Debug, Clone, Default)]
pub struct DemoOutput {
    pub rows: Vec<DemoRow>,
    pub clouds: Vec<CloudRow>,
    /// Sampler diagnostics of failed fits.
    pub failures: Vec<String>,
}

fn row(spec: &ExperimentSpec, run: usize, seed: u64, p1: &str, p2: &str, quantity: &str) -> DemoRow {
    DemoRow {
        experiment: spec.kind.name().to_string(),
        run,
        seed,
        prior1: p1.to_string(),
        prior2: p2.to_string(),
        quantity: quantity.to_string(),
        wim: None,
        wim_se: None,
        boot_resamples: None,
        boot_excluded: None,
        boot_median: None,
        boot_q1: None,
        boot_q3: None,
        boot_lo: None,
        boot_hi: None,
        error: None,
    }
}

fn pairs(k: usize) -> Vec<(usize, usize)> {
    (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).collect()
}

fn sampled(cloud: &EmpiricalMeasure) -> Posterior {
    Posterior::Sampled {
        cloud: cloud.clone(),
        diagnostics: None,
    }
}

fn wim_cfg(seed: u64) -> WimConfig {
    WimConfig {
        seed,
        ..WimConfig::default()
    }
}

/// The synthetic skew-normal sample of run seed `seed`.
pub fn skew_normal_data(spec: &ExperimentSpec, seed: u64) -> Result<Vec<f64>> {
    let d = Distribution::skew_normal(0.0, 1.0, spec.skewness.unwrap_or(5.0))?;
    Ok(d.sample(&mut child_stream(seed, &[0]), spec.sample_size.unwrap_or(50)))
}

/// α-marginal clouds of the six fits.
fn skew_fits(spec: &ExperimentSpec, data: &[f64], seed: u64, path: &[u64]) -> Result<Vec<EmpiricalMeasure>> {
    skewness_priors()
        .iter()
        .enumerate()
        .map(|(k, (_, prior))| {
            let mut p = path.to_vec();
            p.push(k as u64);
            let cfg = spec.mcmc().config(child_seed(seed, &p));
            Ok(fit_skew_normal(data, prior, &cfg)?.skewness())
        })
        .collect()
}

fn skew_matrix(clouds: &[EmpiricalMeasure], seed: u64) -> Result<Vec<(f64, Option<f64>)>> {
    pairs(clouds.len())
        .into_iter()
        .enumerate()
        .map(|(k, (i, j))| {
            let w = wim(&sampled(&clouds[i]), &sampled(&clouds[j]), &wim_cfg(child_seed(seed, &[k as u64])))?;
            Ok((w.wim, w.wim_se))
        })
        .collect()
}

fn skew_run(spec: &ExperimentSpec, run: usize, out: &mut DemoOutput) {
    let seed = child_seed(spec.seed, &[run as u64]);
    let names: Vec<&str> = skewness_priors().iter().map(|p| p.0).collect();
    let pr = pairs(names.len());
    let mut rows: Vec<DemoRow> = pr.iter().map(|&(i, j)| row(spec, run, seed, names[i], names[j], "alpha")).collect();
    let point = skew_normal_data(spec, seed).and_then(|data| {
        let clouds = skew_fits(spec, &data, seed, &[1])?;
        let m = skew_matrix(&clouds, child_seed(seed, &[2]))?;
        Ok((data, clouds, m))
    });
    let (data, clouds, matrix) = match point {
        Ok(v) => v,
        Err(e) => {
            out.failures.push(format!("run {run}: {e}"));
            for r in &mut rows {
                r.error = Some(e.to_string());
            }
            out.rows.extend(rows);
            return;
        }
    };
    for (r, (w, se)) in rows.iter_mut().zip(&matrix) {
        r.wim = Some(*w);
        r.wim_se = *se;
    }
    for (k, c) in clouds.iter().enumerate() {
        out.clouds.extend(c.as_slice().iter().enumerate().map(|(d, &v)| CloudRow {
            run,
            prior: names[k].to_string(),
            quantity: "alpha".into(),
            draw: d,
            value: v,
        }));
    }
    let b = spec.bootstrap.unwrap_or(0);
    if b > 0 {
        let cfg = BootstrapConfig {
            resamples: b,
            seed: child_seed(seed, &[3]),
            include_identity: false,
        };
        let per_resample: Vec<Result<Vec<(f64, Option<f64>)>>> = (0..b)
            .into_par_iter()
            .map(|k| {
                let idx = resample_indices(data.len(), k, &cfg);
                let resample: Vec<f64> = idx.iter().map(|&i| data[i]).collect();
                let clouds = skew_fits(spec, &resample, cfg.seed, &[k as u64, 1])?;
                skew_matrix(&clouds, child_seed(cfg.seed, &[k as u64, 2]))
            })
            .collect();
        summarise_bootstrap(&mut rows, &per_resample, b);
    }
    out.rows.extend(rows);
}

fn summarise_bootstrap(rows: &mut [DemoRow], per_resample: &[Result<Vec<(f64, Option<f64>)>>], b: usize) {
    let excluded = per_resample.iter().filter(|r| r.is_err()).count();
    for (k, r) in rows.iter_mut().enumerate() {
        let values: Vec<f64> = per_resample.iter().flatten().map(|m| m[k].0).collect();
        r.boot_resamples = Some(b);
        r.boot_excluded = Some(excluded);
        match BootstrapReport::from_values(values, excluded) {
            Ok(rep) => {
                r.boot_median = Some(rep.median);
                r.boot_q1 = Some(rep.quartiles.0);
                r.boot_q3 = Some(rep.quartiles.1);
                r.boot_lo = Some(rep.interval95.0);
                r.boot_hi = Some(rep.interval95.1);
            }
            Err(e) => {
                r.error.get_or_insert(format!("bootstrap: {e}"));
            }
        }
    }
}

const LOGISTIC_QUANTITIES: [&str; 4] = ["joint", "beta0", "beta1", "ld50"];

struct LogisticClouds {
    joint: EmpiricalMeasure,
    beta0: EmpiricalMeasure,
    beta1: EmpiricalMeasure,
    ld50: EmpiricalMeasure,
}

impl LogisticClouds {
    fn get(&self, q: &str) -> &EmpiricalMeasure {
        match q {
            "joint" => &self.joint,
            "beta0" => &self.beta0,
            "beta1" => &self.beta1,
            _ => &self.ld50,
        }
    }
}

fn logistic_fits(spec: &ExperimentSpec, data: &DoseResponse, seed: u64) -> Result<Vec<LogisticClouds>> {
    logistic_priors()
        .iter()
        .enumerate()
        .map(|(k, (_, prior))| {
            let cfg = spec.mcmc().config(child_seed(seed, &[1, k as u64]));
            let fit = fit_logistic(&data.doses, &data.trials, &data.successes, *prior, &cfg)?;
            Ok(LogisticClouds {
                beta0: fit.joint.marginal(0)?,
                beta1: fit.joint.marginal(1)?,
                joint: fit.joint,
                ld50: fit.ld50,
            })
        })
        .collect()
}

fn bioassay_run(spec: &ExperimentSpec, data: &DoseResponse, run: usize, out: &mut DemoOutput) {
    let seed = child_seed(spec.seed, &[run as u64]);
    let names: Vec<&str> = logistic_priors().iter().map(|p| p.0).collect();
    let fits = match logistic_fits(spec, data, seed) {
        Ok(f) => f,
        Err(e) => {
            out.failures.push(format!("run {run}: {e}"));
            for (i, j) in pairs(names.len()) {
                for q in LOGISTIC_QUANTITIES {
                    let mut r = row(spec, run, seed, names[i], names[j], q);
                    r.error = Some(e.to_string());
                    out.rows.push(r);
                }
            }
            return;
        }
    };
    for (k, (i, j)) in pairs(names.len()).into_iter().enumerate() {
        for (m, q) in LOGISTIC_QUANTITIES.iter().enumerate() {
            let mut r = row(spec, run, seed, names[i], names[j], q);
            let cfg = wim_cfg(child_seed(seed, &[2, k as u64, m as u64]));
            match wim(&sampled(fits[i].get(q)), &sampled(fits[j].get(q)), &cfg) {
                Ok(w) => {
                    r.wim = Some(w.wim);
                    r.wim_se = w.wim_se;
                }
                Err(e) => r.error = Some(e.to_string()),
            }
            out.rows.push(r);
        }
    }
    for (k, f) in fits.iter().enumerate() {
        for q in ["beta0", "beta1", "ld50"] {
            out.clouds.extend(f.get(q).as_slice().iter().enumerate().map(|(d, &v)| CloudRow {
                run,
                prior: names[k].to_string(),
                quantity: q.into(),
                draw: d,
                value: v,
            }));
        }
    }
}

/// Runs a demo spec: `replicates` independent runs, each with its own seed.
pub fn run_demo(spec: &ExperimentSpec) -> DemoOutput {
    let mut out = DemoOutput::default();
    match spec.kind {
        Kind::SkewNormalDemo => {
            for run in 0..spec.replicates() {
                skew_run(spec, run, &mut out);
            }
        }
        Kind::BioassayDemo => {
            let data = bioassay();
            for run in 0..spec.replicates() {
                bioassay_run(spec, &data, run, &mut out);
            }
        }
        _ => unreachable!("run_demo is only called with demo kinds"),
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec::Mcmc;

    fn quick(kind: Kind) -> ExperimentSpec {
        let mut s = ExperimentSpec::default_for(kind);
        s.seed = 3;
        s.mcmc = Some(Mcmc {
            chains: 2,
            iterations: 600,
            burn_in: 300,
            thin: 1,
        });
        s
    }

    #[test]
    fn skew_normal_matrix_shape() {
        let mut s = quick(Kind::SkewNormalDemo);
        s.bootstrap = Some(2);
        let out = run_demo(&s);
        assert_eq!(out.rows.len(), 15);
        assert!(out.failures.is_empty(), "{:?}", out.failures);
        for r in &out.rows {
            assert!(r.wim.unwrap() >= 0.0);
            assert_eq!(r.boot_resamples, Some(2));
            assert!(r.boot_q1.unwrap() <= r.boot_q3.unwrap());
        }
        assert_eq!(out.clouds.len(), 6 * 600);
    }

    #[test]
    fn bioassay_matrix_shape() {
        let out = run_demo(&quick(Kind::BioassayDemo));
        assert_eq!(out.rows.len(), 6 * 4);
        assert!(out.rows.iter().all(|r| r.error.is_none() && r.wim.is_some()));
    }
}
