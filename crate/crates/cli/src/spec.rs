//! Experiment spec files (TOML).
//!
//! ```toml
//! kind = "poisson-grid"      # binomial-grid, normal-grid, mopess-grid,
//!                            # skew-normal-demo, bioassay-demo
//! seed = 20240101
//! replicates = 100
//! draws = 5000
//! theta = [1, 5, 20, 50]     # rate, success probability or variance
//! n = [10]
//! pairs = [["gamma:2.5:2.5", "gamma:0.5:3.5"]]
//! ```
//!
//! Omitted fields take the desk-scale defaults of the kind. For the demos
//! `replicates` is the number of independent runs and `bootstrap` the number
//! of resamples per run.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use wim_core::sampler::McmcConfig;

use crate::prior::parse_prior;
use crate::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    PoissonGrid,
    BinomialGrid,
    NormalGrid,
    MopessGrid,
    SkewNormalDemo,
    BioassayDemo,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::PoissonGrid => "poisson-grid",
            Kind::BinomialGrid => "binomial-grid",
            Kind::NormalGrid => "normal-grid",
            Kind::MopessGrid => "mopess-grid",
            Kind::SkewNormalDemo => "skew-normal-demo",
            Kind::BioassayDemo => "bioassay-demo",
        }
    }

    pub fn is_demo(self) -> bool {
        matches!(self, Kind::SkewNormalDemo | Kind::BioassayDemo)
    }
}

/// Likelihood of a MOPESS grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridModel {
    Poisson,
    Binomial,
    Normal,
}

/// How the grids compute the WIM of two closed-form posteriors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridRoute {
    /// Posterior draws, as in the simulation studies.
    Sampled,
    Quadrature,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mcmc {
    pub chains: usize,
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
}

impl Mcmc {
    pub fn config(&self, seed: u64) -> McmcConfig {
        McmcConfig {
            chains: self.chains,
            iterations: self.iterations,
            burn_in: self.burn_in,
            thin: self.thin,
            seed,
            ..McmcConfig::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub kind: Kind,
    #[serde(default)]
    pub seed: u64,
    pub replicates: Option<usize>,
    /// Posterior draws per closed-form posterior.
    pub draws: Option<usize>,
    #[serde(default)]
    pub theta: Vec<f64>,
    #[serde(default)]
    pub n: Vec<u64>,
    /// Prior pairs; in a MOPESS grid the first is the base prior and the
    /// second the prior of interest.
    #[serde(default)]
    pub pairs: Vec<[String; 2]>,
    /// Known mean of the normal model.
    #[serde(default)]
    pub mean: f64,
    pub route: Option<GridRoute>,
    /// Likelihood of a MOPESS grid.
    pub model: Option<GridModel>,
    /// MOPESS horizon; defaults to twice the number of observations.
    pub horizon: Option<usize>,
    /// MOPESS replicates per dataset.
    pub mopess_reps: Option<usize>,
    /// Skew-normal demo sample size and true skewness.
    pub sample_size: Option<usize>,
    pub skewness: Option<f64>,
    /// Bootstrap resamples per demo run; 0 disables the bootstrap.
    pub bootstrap: Option<usize>,
    pub mcmc: Option<Mcmc>,
    pub out: Option<PathBuf>,
}

/// Run sizes after flag and paper-scale overrides.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub replicates: Option<usize>,
    pub draws: Option<usize>,
    pub paper_scale: bool,
}

pub const DESK_REPLICATES: usize = 100;
pub const DESK_DRAWS: usize = 5_000;
pub const PAPER_REPLICATES: usize = 1_000;
pub const PAPER_DRAWS: usize = 10_000;

fn input(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        let mut spec: ExperimentSpec = toml::from_str(text).map_err(|e| input(format!("experiment spec: {e}")))?;
        spec.fill_defaults();
        spec.validate()?;
        Ok(spec)
    }

    pub fn read(path: &std::path::Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| input(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// A spec of the given kind with every field at its default.
    pub fn default_for(kind: Kind) -> Self {
        let mut spec = ExperimentSpec {
            kind,
            seed: 0,
            replicates: None,
            draws: None,
            theta: Vec::new(),
            n: Vec::new(),
            pairs: Vec::new(),
            mean: 0.0,
            route: None,
            model: None,
            horizon: None,
            mopess_reps: None,
            sample_size: None,
            skewness: None,
            bootstrap: None,
            mcmc: None,
            out: None,
        };
        spec.fill_defaults();
        spec
    }

    fn fill_defaults(&mut self) {
        let pairs = |v: &[(&str, &str)]| v.iter().map(|(a, b)| [a.to_string(), b.to_string()]).collect();
        let success = || (1..=19).map(|k| k as f64 * 0.05).collect::<Vec<_>>();
        match self.kind {
            Kind::PoissonGrid => {
                default_vec(&mut self.theta, vec![1.0, 5.0, 20.0, 50.0]);
                default_vec(&mut self.n, vec![10]);
                // Second priors on both sides of Gamma(2.5, 2.5) where the
                // prior ratio is monotone.
                if self.pairs.is_empty() {
                    self.pairs = pairs(&[
                        ("gamma:2.5:2.5", "gamma:0.5:3.5"),
                        ("gamma:2.5:2.5", "gamma:0.5:4.5"),
                        ("gamma:2.5:2.5", "gamma:1.5:3.5"),
                        ("gamma:2.5:2.5", "gamma:1.5:4.5"),
                        ("gamma:2.5:2.5", "gamma:3.5:0.5"),
                        ("gamma:2.5:2.5", "gamma:3.5:1.5"),
                        ("gamma:2.5:2.5", "gamma:4.5:0.5"),
                        ("gamma:2.5:2.5", "gamma:4.5:1.5"),
                    ]);
                }
            }
            Kind::BinomialGrid => {
                default_vec(&mut self.theta, success());
                default_vec(&mut self.n, vec![10, 50, 100, 200]);
                if self.pairs.is_empty() {
                    self.pairs = pairs(&[
                        ("uniform", "beta:1/3:1/3"),
                        ("uniform", "beta:0.5:0.5"),
                        ("uniform", "beta:0:0"),
                    ]);
                }
            }
            Kind::NormalGrid => {
                default_vec(&mut self.theta, vec![0.5, 1.0, 10.0, 100.0]);
                default_vec(&mut self.n, vec![10, 50]);
                if self.pairs.is_empty() {
                    self.pairs = pairs(&[
                        ("jeffreys-var", "ig:1:0"),
                        ("jeffreys-var", "ig:1:1"),
                        ("jeffreys-var", "ig:0.5:0.5"),
                        ("jeffreys-var", "ig:1/3:1/3"),
                    ]);
                }
            }
            Kind::MopessGrid => {
                let model = *self.model.get_or_insert(GridModel::Poisson);
                match model {
                    GridModel::Poisson => {
                        default_vec(&mut self.theta, vec![1.0, 5.0, 20.0]);
                        default_vec(&mut self.n, vec![10]);
                        if self.pairs.is_empty() {
                            self.pairs = pairs(&[("gamma:1:0", "gamma:0.5:0"), ("gamma:1:0", "gamma:1:5")]);
                        }
                    }
                    GridModel::Binomial => {
                        default_vec(&mut self.theta, vec![0.1, 0.5, 0.9]);
                        default_vec(&mut self.n, vec![10, 50]);
                        if self.pairs.is_empty() {
                            self.pairs = pairs(&[("uniform", "beta:0.5:0.5")]);
                        }
                    }
                    GridModel::Normal => {
                        default_vec(&mut self.theta, vec![0.5, 10.0]);
                        default_vec(&mut self.n, vec![10]);
                        if self.pairs.is_empty() {
                            self.pairs = pairs(&[("jeffreys-var", "ig:1:1")]);
                        }
                    }
                }
                self.mopess_reps.get_or_insert(100);
                self.replicates.get_or_insert(20);
            }
            Kind::SkewNormalDemo => {
                self.sample_size.get_or_insert(50);
                self.skewness.get_or_insert(5.0);
                self.replicates.get_or_insert(1);
                self.bootstrap.get_or_insert(0);
                self.mcmc.get_or_insert(Mcmc {
                    chains: 2,
                    iterations: 4_000,
                    burn_in: 2_000,
                    thin: 2,
                });
            }
            Kind::BioassayDemo => {
                self.replicates.get_or_insert(1);
                self.bootstrap.get_or_insert(0);
                self.mcmc.get_or_insert(Mcmc {
                    chains: 4,
                    iterations: 2_000,
                    burn_in: 1_000,
                    thin: 3,
                });
            }
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.replicates == Some(0) {
            return Err(input("replicates must be at least 1"));
        }
        if self.draws.is_some_and(|d| d < 2) {
            return Err(input("draws must be at least 2"));
        }
        if self.mopess_reps == Some(0) || self.horizon == Some(0) {
            return Err(input("MOPESS horizon and replicate count must be at least 1"));
        }
        if let Some(m) = &self.mcmc {
            if m.chains == 0 || m.thin == 0 || m.burn_in >= m.iterations {
                return Err(input("mcmc needs chains >= 1, thin >= 1 and burn_in < iterations"));
            }
        }
        if self.kind.is_demo() {
            if self.sample_size.is_some_and(|n| n < 3) {
                return Err(input("sample_size must be at least 3"));
            }
            return Ok(());
        }
        if self.theta.is_empty() || self.n.is_empty() || self.pairs.is_empty() {
            return Err(input("theta, n and pairs must be non-empty"));
        }
        if self.n.contains(&0) {
            return Err(input("sample sizes must be positive"));
        }
        let model = self.grid_model();
        for &t in &self.theta {
            let ok = match model {
                GridModel::Poisson => t > 0.0 && t.is_finite(),
                GridModel::Binomial => t > 0.0 && t < 1.0,
                GridModel::Normal => t > 0.0 && t.is_finite(),
            };
            if !ok {
                return Err(input(format!("theta = {t} is outside the domain of the {model:?} model")));
            }
        }
        if !self.mean.is_finite() {
            return Err(input("mean must be finite"));
        }
        for pair in &self.pairs {
            for p in pair {
                parse_prior(p)?;
            }
        }
        Ok(())
    }

    /// Likelihood used by a grid kind.
    pub fn grid_model(&self) -> GridModel {
        match self.kind {
            Kind::PoissonGrid => GridModel::Poisson,
            Kind::BinomialGrid => GridModel::Binomial,
            Kind::NormalGrid => GridModel::Normal,
            _ => self.model.unwrap_or(GridModel::Poisson),
        }
    }

    /// Applies overrides: flag, then paper scale, then the spec file, then
    /// the desk defaults.
    pub fn resolve(&mut self, o: &Overrides) -> CliResult<()> {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        let (reps, draws) = if o.paper_scale {
            (PAPER_REPLICATES, PAPER_DRAWS)
        } else {
            (DESK_REPLICATES, DESK_DRAWS)
        };
        let flag = o.replicates.or(if o.paper_scale && !self.kind.is_demo() { Some(reps) } else { None });
        if let Some(r) = flag {
            self.replicates = Some(r);
        }
        self.replicates.get_or_insert(reps);
        let d = o.draws.or(if o.paper_scale { Some(draws) } else { None });
        if let Some(d) = d {
            self.draws = Some(d);
        }
        self.draws.get_or_insert(draws);
        if o.paper_scale && self.kind.is_demo() {
            self.mcmc = Some(match self.kind {
                // Long chains as in the skew-normal study, shortened to the
                // sampler's default length.
                Kind::SkewNormalDemo => Mcmc {
                    chains: 4,
                    iterations: 20_000,
                    burn_in: 10_000,
                    thin: 5,
                },
                _ => Mcmc {
                    chains: 4,
                    iterations: 2_000,
                    burn_in: 1_000,
                    thin: 3,
                },
            });
            if self.kind == Kind::SkewNormalDemo && self.bootstrap == Some(0) {
                self.bootstrap = Some(250);
            }
        }
        self.validate()
    }

    pub fn replicates(&self) -> usize {
        self.replicates.unwrap_or(DESK_REPLICATES)
    }

    pub fn draws(&self) -> usize {
        self.draws.unwrap_or(DESK_DRAWS)
    }

    pub fn mcmc(&self) -> Mcmc {
        self.mcmc.clone().unwrap_or(Mcmc {
            chains: 4,
            iterations: 2_000,
            burn_in: 1_000,
            thin: 3,
        })
    }
}

fn default_vec<T>(v: &mut Vec<T>, d: Vec<T>) {
    if v.is_empty() {
        *v = d;
    }
}
