//! Subcommands of the `wim` binary.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use wim_core::impact::{
    assess, bootstrap_wim, conjugate_bounds, mle, mopess, neutrality, AssessOptions, BootstrapConfig,
    BootstrapReport, MopessConfig, Route, WimConfig,
};
use wim_core::posterior::{conjugate_posterior, BayesModel, Likelihood, Posterior, PriorSpec};
use wim_core::WimError;

use crate::data::read_observations;
use crate::demo::{run_demo, CLOUD_SCHEMA, DEMO_SCHEMA};
use crate::harness::{run_grid, GRID_SCHEMA};
use crate::output::{emit, format_float, write_json, CsvRecord, Field, Format};
use crate::prior::parse_prior;
use crate::spec::{ExperimentSpec, Kind, Overrides};
use crate::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "wim", version, about = "Measure the impact of a Bayesian prior with Wasserstein distances")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Root seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Posterior draws per closed-form posterior on the sampled route.
    #[arg(long)]
    pub draws: Option<usize>,
    /// Replicates of a simulation grid or demo, MOPESS repeats.
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: FormatArg,
    /// Paper-scale replicate and draw counts (1000 and 10000).
    #[arg(long)]
    pub paper_scale: bool,
}

impl Common {
    fn format(&self) -> Format {
        match self.format {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }

    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            replicates: self.replicates,
            draws: self.draws,
            paper_scale: self.paper_scale,
        }
    }
}

/// Where the observations come from.
#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Likelihood: poisson, binomial[:TRIALS] or normal[:MEAN].
    #[arg(long)]
    pub model: String,
    /// Observation file, one value per line.
    #[arg(long, conflicts_with_all = ["n", "sum"])]
    pub data: Option<PathBuf>,
    /// Sample size (number of trials for a binomial summary).
    #[arg(long, requires = "sum")]
    pub n: Option<u64>,
    /// Sufficient statistic: Σx, successes, or Σ(x - mean)².
    #[arg(long, requires = "n", allow_negative_numbers = true)]
    pub sum: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct PairArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub prior1: String,
    #[arg(long, allow_hyphen_values = true)]
    pub prior2: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RouteArg {
    /// Quadrature for closed-form posteriors.
    Auto,
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DemoName {
    Skewnormal,
    Bioassay,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// WIM, bounds and Neutrality of two priors on one dataset.
    Compare {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, value_enum, default_value = "auto")]
        route: RouteArg,
        #[command(flatten)]
        common: Common,
    },
    /// Lower and upper bounds on the WIM.
    Bounds {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Posterior mass below the MLE under each prior.
    Neutrality {
        #[command(flatten)]
        data: DataArgs,
        /// Prior; may be repeated.
        #[arg(long = "prior", required = true, allow_hyphen_values = true)]
        priors: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Mean observed prior effective sample size.
    Mopess {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, allow_hyphen_values = true)]
        interest: String,
        #[arg(long, allow_hyphen_values = true)]
        base: String,
        /// Largest number of added observations; twice the sample size by default.
        #[arg(long)]
        horizon: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Run an experiment spec file.
    Simulate {
        spec: PathBuf,
        /// Also write posterior draws of a demo spec here.
        #[arg(long)]
        clouds: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Bootstrap distribution of the WIM.
    Bootstrap {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        pair: PairArgs,
        /// Number of resamples.
        #[arg(long, default_value_t = 250, allow_negative_numbers = true)]
        resamples: i64,
        /// Make resample 0 the original data.
        #[arg(long)]
        identity: bool,
        #[arg(long, value_enum, default_value = "auto")]
        route: RouteArg,
        #[command(flatten)]
        common: Common,
    },
    /// Pairwise WIM matrices of the skew-normal and bioassay applications.
    Demo {
        #[arg(value_enum)]
        name: DemoName,
        /// Bootstrap resamples per run (skew-normal demo).
        #[arg(long)]
        bootstrap: Option<usize>,
        /// Also write posterior draws here.
        #[arg(long)]
        clouds: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

fn input(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

/// Parses `poisson`, `binomial[:N]` or `normal[:MU]`. A bare `binomial`
/// means Bernoulli observations, or `n` trials with a summary.
pub fn parse_model(text: &str, summary_n: Option<u64>) -> CliResult<Likelihood> {
    let mut parts = text.splitn(2, ':');
    let name = parts.next().unwrap_or("").trim().to_ascii_lowercase();
    let arg = parts.next();
    let bad = |what: &str| input(format!("model '{text}': {what}"));
    match (name.as_str(), arg) {
        ("poisson", None) => Ok(Likelihood::PoissonIid),
        ("binomial", None) => Ok(Likelihood::BinomialCount {
            trials: summary_n.unwrap_or(1),
        }),
        ("binomial", Some(t)) => {
            if summary_n.is_some() {
                return Err(bad("give the trial count either in the model or with --n"));
            }
            let trials: u64 = t.parse().map_err(|_| bad("trial count must be a positive integer"))?;
            if trials == 0 {
                return Err(bad("trial count must be a positive integer"));
            }
            Ok(Likelihood::BinomialCount { trials })
        }
        ("normal", None) => Ok(Likelihood::NormalKnownMean { mean: 0.0 }),
        ("normal", Some(m)) => {
            let mean: f64 = m.parse().map_err(|_| bad("mean must be a number"))?;
            if !mean.is_finite() {
                return Err(bad("mean must be finite"));
            }
            Ok(Likelihood::NormalKnownMean { mean })
        }
        _ => Err(bad("expected poisson, binomial[:TRIALS] or normal[:MEAN]")),
    }
}

/// Observations with the given sufficient statistic.
pub fn data_from_summary(likelihood: &Likelihood, n: u64, sum: f64) -> CliResult<Vec<f64>> {
    if n == 0 {
        return Err(input("--n must be positive"));
    }
    if !sum.is_finite() || sum < 0.0 {
        return Err(input("--sum must be finite and non-negative"));
    }
    let n = n as usize;
    match likelihood {
        Likelihood::PoissonIid => {
            let mut d = vec![0.0; n];
            d[0] = sum;
            Ok(d)
        }
        Likelihood::BinomialCount { .. } => Ok(vec![sum]),
        Likelihood::NormalKnownMean { mean } => {
            let mut d = vec![*mean; n];
            d[0] = mean + sum.sqrt();
            Ok(d)
        }
        _ => unreachable!("summaries exist for the conjugate models only"),
    }
}

pub fn load_model(args: &DataArgs) -> CliResult<BayesModel> {
    let likelihood = parse_model(&args.model, args.n)?;
    let data = match (&args.data, args.n, args.sum) {
        (Some(path), _, _) => read_observations(path)?,
        (None, Some(n), Some(s)) => data_from_summary(&likelihood, n, s)?,
        _ => return Err(input("give a dataset with --data or a summary with --n and --sum")),
    };
    likelihood
        .check_data(&data)
        .map_err(|e| input(format!("dataset does not fit the {} model: {e}", likelihood.name())))?;
    Ok(BayesModel::new(likelihood, data, PriorSpec::Flat)?)
}

fn priors(pair: &PairArgs) -> CliResult<(PriorSpec, PriorSpec)> {
    Ok((parse_prior(&pair.prior1)?, parse_prior(&pair.prior2)?))
}

fn wim_config(common: &Common, route: RouteArg) -> WimConfig {
    let mut cfg = WimConfig {
        seed: common.seed.unwrap_or(0),
        draws: common
            .draws
            .unwrap_or(if common.paper_scale { 10_000 } else { WimConfig::default().draws }),
        ..WimConfig::default()
    };
    if route == RouteArg::Sampled {
        cfg.route = Route::Sampled;
    }
    cfg
}

fn sink(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(std::io::BufWriter::new(
            std::fs::File::create(p).map_err(|e| input(format!("cannot create {}: {e}", p.display())))?,
        )),
        None => Box::new(std::io::stdout().lock()),
    })
}

/// Prints `text` to stdout and, with `--out` or `--format json`, writes
/// `value` as JSON to the output.
fn report<T: Serialize>(text: &str, value: &T, common: &Common) -> CliResult<()> {
    if common.format == FormatArg::Json && common.out.is_none() {
        return write_json(value, std::io::stdout().lock());
    }
    print!("{text}");
    if let Some(p) = &common.out {
        let mut s = sink(Some(p))?;
        write_json(value, &mut s)?;
        s.flush()?;
    }
    Ok(())
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), format_float)
}

#[derive(Serialize)]
struct CompareOutput<'a> {
    model: &'a str,
    n: usize,
    prior1: &'a str,
    prior2: &'a str,
    seed: u64,
    report: &'a wim_core::impact::ImpactReport,
}

fn compare(data: &DataArgs, pair: &PairArgs, route: RouteArg, common: &Common) -> CliResult<()> {
    let model = load_model(data)?;
    let (p1, p2) = priors(pair)?;
    let opts = AssessOptions {
        wim: wim_config(common, route),
        ..AssessOptions::default()
    };
    let r = assess(&model, &p1, &p2, &opts)?;
    let mut text = String::new();
    text += &format!("wim        {}\n", format_float(r.wim));
    text += &format!("wim_se     {}\n", opt(r.wim_se));
    text += &format!("method     {}\n", r.method);
    text += &format!("seed       {}\n", opts.wim.seed);
    if let Some(b) = &r.bounds {
        text += &format!("lower      {}\n", format_float(b.lower));
        text += &format!("upper      {}\n", format_float(b.upper));
        text += &format!("exact      {}\n", opt(b.exact));
        text += &format!("bounds     {}\n", b.method);
        for w in &b.warnings {
            text += &format!("warning    {w}\n");
        }
    }
    if let Some([a, b]) = &r.neutrality {
        text += &format!("neutrality {} {}\n", format_float(a.value), format_float(b.value));
    }
    let out = CompareOutput {
        model: model.likelihood.name(),
        n: model.data.len(),
        prior1: &pair.prior1,
        prior2: &pair.prior2,
        seed: opts.wim.seed,
        report: &r,
    };
    report(&text, &out, common)
}

fn bounds(data: &DataArgs, pair: &PairArgs, common: &Common) -> CliResult<()> {
    let model = load_model(data)?;
    let (p1, p2) = priors(pair)?;
    let b = conjugate_bounds(&model, &p1, &p2)?.ok_or_else(|| {
        WimError::Unsupported(format!(
            "no bounds for {} against {} in the {} model",
            pair.prior1,
            pair.prior2,
            model.likelihood.name()
        ))
    })?;
    let mut text = format!(
        "lower  {}\nupper  {}\nexact  {}\nmethod {}\n",
        format_float(b.lower),
        format_float(b.upper),
        opt(b.exact),
        b.method
    );
    for w in &b.warnings {
        text += &format!("warning {w}\n");
    }
    report(&text, &b, common)
}

#[derive(Serialize)]
struct NeutralityLine {
    prior: String,
    mle: f64,
    neutrality: f64,
    degenerate: bool,
}

fn neutrality_cmd(data: &DataArgs, specs: &[String], common: &Common) -> CliResult<()> {
    let model = load_model(data)?;
    let est = mle(&model)?[0];
    let mut lines = Vec::new();
    let mut text = String::new();
    for s in specs {
        let prior = parse_prior(s)?;
        let post = Posterior::Analytic(conjugate_posterior(&model.with_prior(prior))?);
        let n = neutrality(&post, est)?;
        text += &format!(
            "{s}  {}{}\n",
            format_float(n.value),
            if n.degenerate { "  (MLE on the support boundary)" } else { "" }
        );
        lines.push(NeutralityLine {
            prior: s.clone(),
            mle: est,
            neutrality: n.value,
            degenerate: n.degenerate,
        });
    }
    report(&format!("mle  {}\n{text}", format_float(est)), &lines, common)
}

fn mopess_cmd(data: &DataArgs, interest: &str, base: &str, horizon: Option<usize>, common: &Common) -> CliResult<()> {
    let model = load_model(data)?;
    let (pi, pb) = (parse_prior(interest)?, parse_prior(base)?);
    let cfg = MopessConfig {
        horizon,
        reps: common.replicates.unwrap_or(if common.paper_scale { 1_000 } else { 100 }),
        seed: common.seed.unwrap_or(0),
    };
    if cfg.reps == 0 || cfg.horizon == Some(0) {
        return Err(input("replicates and horizon must be at least 1"));
    }
    let r = mopess(&model, &pi, &pb, &cfg)?;
    let text = format!(
        "mopess  {}\nse      {}\nband    {} {}\nhorizon {}\nreps    {}\nseed    {}\n",
        format_float(r.mopess),
        format_float(r.se),
        format_float(r.quantile_band.0),
        format_float(r.quantile_band.1),
        r.horizon,
        r.reps,
        cfg.seed
    );
    report(&text, &r, common)
}

struct BootRow {
    resample: usize,
    wim: f64,
}

impl CsvRecord for BootRow {
    const HEADER: &'static [&'static str] = &["resample", "wim"];

    fn fields(&self) -> Vec<Field<'_>> {
        vec![Field::Int(self.resample as u64), Field::Float(Some(self.wim))]
    }
}

pub const BOOTSTRAP_SCHEMA: &str = "wim-bootstrap v1";

pub fn bootstrap_csv(r: &BootstrapReport) -> String {
    let rows: Vec<BootRow> = r
        .values
        .iter()
        .enumerate()
        .map(|(resample, &wim)| BootRow { resample, wim })
        .collect();
    let mut s = crate::output::csv_string(&rows, BOOTSTRAP_SCHEMA);
    s += &format!("# excluded {}\n", r.excluded);
    s += &format!("# median {}\n", format_float(r.median));
    s += &format!("# quartiles {} {}\n", format_float(r.quartiles.0), format_float(r.quartiles.1));
    s += &format!("# interval95 {} {}\n", format_float(r.interval95.0), format_float(r.interval95.1));
    s
}

fn bootstrap_cmd(
    data: &DataArgs,
    pair: &PairArgs,
    resamples: i64,
    identity: bool,
    route: RouteArg,
    common: &Common,
) -> CliResult<()> {
    if resamples < 1 {
        return Err(input(format!("--resamples must be at least 1, got {resamples}")));
    }
    let model = load_model(data)?;
    let (p1, p2) = priors(pair)?;
    let cfg = BootstrapConfig {
        resamples: resamples as usize,
        seed: common.seed.unwrap_or(0),
        include_identity: identity,
    };
    let r = bootstrap_wim(&model, &p1, &p2, &cfg, &wim_config(common, route))?;
    let mut s = sink(common.out.as_deref())?;
    match common.format {
        FormatArg::Csv => s.write_all(bootstrap_csv(&r).as_bytes())?,
        FormatArg::Json => write_json(&r, &mut s)?,
    }
    s.flush()?;
    Ok(())
}

fn run_spec(spec: &ExperimentSpec, clouds: Option<&Path>, common: &Common) -> CliResult<()> {
    let out = common.out.as_deref().or(spec.out.as_deref());
    if spec.kind.is_demo() {
        let d = run_demo(spec);
        emit(&d.rows, DEMO_SCHEMA, common.format(), out)?;
        if let Some(p) = clouds {
            emit(&d.clouds, CLOUD_SCHEMA, common.format(), Some(p))?;
        }
        if !d.failures.is_empty() {
            for f in &d.failures {
                eprintln!("{f}");
            }
            return Err(WimError::SamplerFailure(format!("{} run(s) failed", d.failures.len())).into());
        }
    } else {
        let rows = run_grid(spec);
        emit(&rows, GRID_SCHEMA, common.format(), out)?;
    }
    Ok(())
}

pub fn execute(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Compare {
            data,
            pair,
            route,
            common,
        } => compare(&data, &pair, route, &common),
        Command::Bounds { data, pair, common } => bounds(&data, &pair, &common),
        Command::Neutrality { data, priors, common } => neutrality_cmd(&data, &priors, &common),
        Command::Mopess {
            data,
            interest,
            base,
            horizon,
            common,
        } => mopess_cmd(&data, &interest, &base, horizon, &common),
        Command::Simulate { spec, clouds, common } => {
            let mut s = ExperimentSpec::read(&spec)?;
            s.resolve(&common.overrides())?;
            run_spec(&s, clouds.as_deref(), &common)
        }
        Command::Bootstrap {
            data,
            pair,
            resamples,
            identity,
            route,
            common,
        } => bootstrap_cmd(&data, &pair, resamples, identity, route, &common),
        Command::Demo {
            name,
            bootstrap,
            clouds,
            common,
        } => {
            let kind = match name {
                DemoName::Skewnormal => Kind::SkewNormalDemo,
                DemoName::Bioassay => Kind::BioassayDemo,
            };
            let mut s = ExperimentSpec::default_for(kind);
            if bootstrap.is_some() {
                s.bootstrap = bootstrap;
            }
            s.resolve(&common.overrides())?;
            run_spec(&s, clouds.as_deref(), &common)
        }
    }
}

/// Parses arguments and runs; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn models() {
        assert_eq!(parse_model("poisson", None).unwrap(), Likelihood::PoissonIid);
        assert_eq!(parse_model("binomial:12", None).unwrap(), Likelihood::BinomialCount { trials: 12 });
        assert_eq!(parse_model("binomial", Some(10)).unwrap(), Likelihood::BinomialCount { trials: 10 });
        assert_eq!(parse_model("normal:1.5", None).unwrap(), Likelihood::NormalKnownMean { mean: 1.5 });
        assert!(parse_model("binomial:0", None).is_err());
        assert!(parse_model("gamma", None).is_err());
    }

    #[test]
    fn summaries_reproduce_the_statistic() {
        let d = data_from_summary(&Likelihood::NormalKnownMean { mean: 1.0 }, 10, 10.0).unwrap();
        let ss: f64 = d.iter().map(|x| (x - 1.0) * (x - 1.0)).sum();
        assert!((ss - 10.0).abs() < 1e-12);
        assert_eq!(data_from_summary(&Likelihood::PoissonIid, 3, 7.0).unwrap(), vec![7.0, 0.0, 0.0]);
    }
}
