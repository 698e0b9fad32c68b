//! Argument handling and the three subcommands.
//!
//! Exit codes: 0 pass, 1 fail, 2 inconclusive, 3 usage error.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use heavysum_core::dominance::{self, McConfig, RatioMethod, RatioRow, WeightSampler};
use heavysum_core::{
    combinators, membership, Criterion, DependenceModel, Distribution, Error, Grid, Verdict, WeightVector,
};
use serde::Serialize;

use crate::expr::{self, ParseError};
use crate::report::{self, ext, Format, RunConfig};
use crate::suite::{self, SuiteOptions};

pub const EXIT_USAGE: i32 = 3;
pub const DEFAULT_SEED: u64 = 42;
pub const SEED_ENV: &str = "HEAVYSUM_SEED";

#[derive(Parser, Debug)]
#[command(name = "heavysum", version, about = "Dominance checks for weighted sums of extremely heavy-tailed risks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Membership checks: class H, its strict variant, the sufficient
    /// conditions, super-Frechet and super-Pareto.
    Check(CheckArgs),
    /// Stochastic dominance engines.
    Dominance(DominanceArgs),
    /// Full acceptance battery; writes one report per check and an index.
    Suite(SuiteArgs),
}

#[derive(Args, Debug, Clone)]
pub struct GridArgs {
    #[arg(long, default_value_t = 1e-6)]
    pub grid_min: f64,
    #[arg(long, default_value_t = 1e6)]
    pub grid_max: f64,
    #[arg(long, default_value_t = 200)]
    pub grid_points: usize,
    #[arg(long, value_enum, default_value_t = ScaleArg::Log)]
    pub grid_scale: ScaleArg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ScaleArg {
    Log,
    Linear,
}

impl GridArgs {
    fn grid(&self) -> Result<Grid, Usage> {
        let g = match self.grid_scale {
            ScaleArg::Log => Grid::log(self.grid_min, self.grid_max, self.grid_points),
            ScaleArg::Linear => Grid::linear(self.grid_min, self.grid_max, self.grid_points),
        };
        g.map_err(|e| Usage(format!("invalid grid: {e}")))
    }
}

#[derive(Args, Debug, Clone)]
pub struct OutArgs {
    /// Output file (a directory for `suite`); stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    #[arg(long)]
    pub dist: String,
    /// class-h, class-h-strict, sufficient, super-frechet or super-pareto.
    #[arg(long, default_value = "class-h")]
    pub criterion: String,
    #[arg(long, default_value_t = membership::DEFAULT_TOL)]
    pub tol: f64,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub output: OutArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    /// Product-bound certificate, valid for every NLOD coupling.
    Bound,
    /// Independent sum by quadrature.
    Quadrature,
    /// Monte Carlo under `--dep`.
    Empirical,
    /// Value-at-Risk superadditivity.
    Var,
    /// Generalized r-mean target with non-identical marginals.
    Rmean,
    /// Random weights, optionally triggered by independent events.
    RandomWeights,
    /// Majorization experiment (exploratory).
    Majorize,
    /// Deadly risks.
    Deadly,
    /// VaR ratio of an iid sum against the single risk (report only).
    Ratio,
}

#[derive(Args, Debug)]
pub struct DominanceArgs {
    #[arg(long, value_enum)]
    pub mode: ModeArg,
    #[arg(long)]
    pub dist: Option<String>,
    /// `;`-separated marginals for `rmean`.
    #[arg(long)]
    pub dists: Option<String>,
    /// Comma-separated weights; uniform over the marginals by default.
    #[arg(long)]
    pub weights: Option<String>,
    /// Weights `eta` compared against `--weights` in `majorize`.
    #[arg(long)]
    pub compare_weights: Option<String>,
    #[arg(long, default_value = "indep")]
    pub dep: String,
    #[arg(long, default_value_t = 0.0)]
    pub r: f64,
    /// Comma-separated probability levels for `var` and `ratio`.
    #[arg(long)]
    pub p: Option<String>,
    /// Number of summands for `ratio`.
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// Event probability for `random-weights`; constant weights if absent.
    #[arg(long)]
    pub event_prob: Option<f64>,
    #[arg(long, default_value_t = 1_000_000)]
    pub m: usize,
    #[arg(long, default_value_t = dominance::DEFAULT_DELTA)]
    pub delta: f64,
    #[arg(long, env = SEED_ENV, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub output: OutArgs,
}

#[derive(Args, Debug)]
pub struct SuiteArgs {
    #[arg(long, env = SEED_ENV, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value = "heavysum-suite")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Distribution asserted to be in class H; repeatable.
    #[arg(long)]
    pub inject: Vec<String>,
}

/// A configuration problem; exits with code 3.
#[derive(Debug)]
pub struct Usage(pub String);

fn parse_err(flag: &str) -> impl Fn(ParseError) -> Usage + '_ {
    move |e| Usage(format!("invalid --{flag}: {e}"))
}

fn core_usage(e: Error) -> Usage {
    Usage(e.to_string())
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Check(a) => cmd_check(&a),
        Command::Dominance(a) => cmd_dominance(&a),
        Command::Suite(a) => cmd_suite(&a),
    };
    match result {
        Ok(code) => code,
        Err(Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
    }
}

fn write_out(output: &OutArgs, contents: &str) -> Result<(), Usage> {
    report::emit(output.out.as_deref(), contents).map_err(|e| Usage(format!("cannot write output: {e}")))
}

pub fn cmd_check(a: &CheckArgs) -> Result<i32, Usage> {
    let dist = expr::parse_dist(&a.dist).map_err(parse_err("dist"))?;
    let criterion = Criterion::from_name(&a.criterion).ok_or_else(|| {
        let names: Vec<&str> = Criterion::ALL.iter().map(|c| c.name()).collect();
        Usage(format!(
            "invalid --criterion: unknown criterion `{}` (expected one of {})",
            a.criterion,
            names.join(", ")
        ))
    })?;
    if a.tol.is_nan() || a.tol < 0.0 {
        return Err(Usage(format!("invalid --tol: `{}`", a.tol)));
    }
    let grid = a.grid.grid()?;
    let r = membership::check(&dist, criterion, &grid, a.tol);
    let config = RunConfig {
        command: "check".into(),
        criterion: Some(criterion.name().into()),
        dist: Some(dist.expression()),
        grid: Some(grid),
        tol: Some(a.tol),
        format: Some(a.output.format),
        ..RunConfig::default()
    };
    let text = match a.output.format {
        Format::Json => report::to_json(&config, &r),
        Format::Csv => report::membership_csv(&r),
    };
    write_out(&a.output, &text)?;
    if r.verdict == Verdict::Fail {
        if let Some([x, y]) = r.witness {
            eprintln!("{}: {} at ({x}, {y})", r.criterion, r.verdict);
        }
    }
    Ok(r.verdict.exit_code())
}

fn weights_or_uniform(src: Option<&str>, n: usize, flag: &str) -> Result<WeightVector, Usage> {
    match src {
        Some(s) => {
            let v = expr::parse_numbers(s).map_err(parse_err(flag))?;
            WeightVector::new(v).map_err(|e| Usage(format!("invalid --{flag}: {e}")))
        }
        None => WeightVector::uniform(n).map_err(core_usage),
    }
}

fn levels(src: Option<&str>, default: &[f64]) -> Result<Vec<f64>, Usage> {
    let ps = match src {
        Some(s) => expr::parse_numbers(s).map_err(parse_err("p"))?,
        None => default.to_vec(),
    };
    if let Some(p) = ps.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
        return Err(Usage(format!("invalid --p: `{p}` is outside (0, 1)")));
    }
    Ok(ps)
}

#[derive(Serialize)]
struct RatioReport<'a> {
    mode: &'static str,
    dist: String,
    n: usize,
    #[serde(serialize_with = "opt_ext")]
    limit: Option<f64>,
    verdict: Verdict,
    notes: Vec<&'static str>,
    rows: &'a [RatioRow],
}

fn opt_ext<S: serde::Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(x) => ext(*x).serialize(s),
        None => s.serialize_none(),
    }
}

/// Errors raised by an engine: configuration problems are usage errors,
/// numerical failures are inconclusive.
fn engine_err(e: Error) -> Result<i32, Usage> {
    match e {
        Error::Quadrature { .. } => {
            eprintln!("inconclusive: {e}");
            Ok(Verdict::Inconclusive.exit_code())
        }
        Error::ScalingHypothesis { .. } => {
            eprintln!("refused: {e}");
            Ok(Verdict::Fail.exit_code())
        }
        other => Err(core_usage(other)),
    }
}

pub fn cmd_dominance(a: &DominanceArgs) -> Result<i32, Usage> {
    let grid = a.grid.grid()?;
    let dep = expr::parse_dependence(&a.dep).map_err(parse_err("dep"))?;
    let dist = a
        .dist
        .as_deref()
        .map(|s| expr::parse_dist(s).map_err(parse_err("dist")))
        .transpose()?;
    let need_dist = || {
        dist.clone()
            .ok_or_else(|| Usage(format!("--mode {:?} needs --dist", a.mode).to_lowercase()))
    };
    let mc = McConfig {
        seed: a.seed,
        m: a.m,
        delta: a.delta,
    };
    let mut config = RunConfig {
        command: "dominance".into(),
        mode: a.mode.to_possible_value().map(|v| v.get_name().to_string()),
        dist: dist.as_ref().map(Distribution::expression),
        grid: Some(grid),
        format: Some(a.output.format),
        ..RunConfig::default()
    };
    let stochastic = |config: &mut RunConfig| {
        config.m = Some(a.m);
        config.delta = Some(a.delta);
        config.seed = Some(a.seed);
        config.dep = Some(dep.to_string());
    };
    let result = match a.mode {
        ModeArg::Bound | ModeArg::Quadrature | ModeArg::Empirical | ModeArg::Var => {
            let d = need_dist()?;
            let wv = weights_or_uniform(a.weights.as_deref(), 2, "weights")?;
            config.weights = Some(wv.as_slice().to_vec());
            let marginals = vec![d.clone(); wv.len()];
            match a.mode {
                ModeArg::Bound => Ok(dominance::check_product_bound(&d, &wv, &grid)),
                ModeArg::Quadrature => {
                    config.dep = Some(DependenceModel::Independent.to_string());
                    dominance::check_dominance_quadrature(&d, &marginals, &wv, &grid)
                }
                ModeArg::Empirical => {
                    stochastic(&mut config);
                    dominance::check_dominance_empirical(&d, &marginals, &wv, &dep, &mc, &grid)
                }
                _ => {
                    stochastic(&mut config);
                    let ps = levels(a.p.as_deref(), &[0.9, 0.99, 0.999])?;
                    config.p = Some(ps.clone());
                    config.grid = None;
                    dominance::check_var_superadditivity(&d, &wv, &ps, &dep, &mc)
                }
            }
        }
        ModeArg::Rmean => {
            let src = a
                .dists
                .as_deref()
                .ok_or_else(|| Usage("--mode rmean needs --dists".into()))?;
            let parts = expr::parse_dist_list(src).map_err(parse_err("dists"))?;
            let wv = weights_or_uniform(a.weights.as_deref(), parts.len(), "weights")?;
            stochastic(&mut config);
            config.dists = Some(parts.iter().map(Distribution::expression).collect());
            config.weights = Some(wv.as_slice().to_vec());
            config.r = Some(a.r);
            combinators::generalized_r_mean(&parts, &wv, a.r).and_then(|target| {
                config.dist = Some(target.expression());
                dominance::check_dominance_empirical(&target, &parts, &wv, &dep, &mc, &grid)
            })
        }
        ModeArg::RandomWeights => {
            let d = need_dist()?;
            let theta = match &a.weights {
                Some(s) => expr::parse_numbers(s).map_err(parse_err("weights"))?,
                None => vec![0.5, 0.5],
            };
            config.weights = Some(theta.clone());
            config.m = Some(a.m);
            config.delta = Some(a.delta);
            config.seed = Some(a.seed);
            config.event_prob = a.event_prob;
            let sampler = match a.event_prob {
                Some(p) => WeightSampler::TriggeringEvents {
                    probs: vec![p; theta.len()],
                    theta,
                },
                None => WeightSampler::Constant(theta),
            };
            dominance::check_random_weight_bound(&d, &sampler, &mc, &grid)
        }
        ModeArg::Majorize => {
            let d = need_dist()?;
            let gamma = weights_or_uniform(a.weights.as_deref(), 2, "weights")?;
            let src = a
                .compare_weights
                .as_deref()
                .ok_or_else(|| Usage("--mode majorize needs --compare-weights".into()))?;
            let eta = weights_or_uniform(Some(src), 2, "compare-weights")?;
            stochastic(&mut config);
            config.weights = Some(gamma.as_slice().to_vec());
            config.compare_weights = Some(eta.as_slice().to_vec());
            dominance::majorization_experiment(&d, &eta, &gamma, &dep, &mc, &grid)
        }
        ModeArg::Deadly => {
            let d = need_dist()?;
            let Some(heavysum_core::Family::Deadly { p }) = d.as_family().copied() else {
                return Err(Usage("--mode deadly needs --dist deadly(p=...)".into()));
            };
            let n = match &a.weights {
                Some(s) => expr::parse_numbers(s).map_err(parse_err("weights"))?.len(),
                None => a.n,
            };
            stochastic(&mut config);
            config.n = Some(n);
            config.grid = None;
            dominance::deadly_experiment(p, n, &dep, &mc)
        }
        ModeArg::Ratio => {
            let d = need_dist()?;
            let ps = levels(a.p.as_deref(), &suite::RATIO_LEVELS)?;
            config.n = Some(a.n);
            config.p = Some(ps.clone());
            config.grid = None;
            let rows = match dominance::asymptotic_var_ratio(&d, a.n, &ps, RatioMethod::Quadrature) {
                Ok(r) => r,
                Err(e) => return engine_err(e),
            };
            let limit = dominance::tail_index(&d)
                .filter(|&alpha| alpha < 1.0)
                .map(|alpha| (a.n as f64).powf(1.0 / alpha - 1.0));
            let rep = RatioReport {
                mode: "ratio",
                dist: d.expression(),
                n: a.n,
                limit,
                verdict: Verdict::Pass,
                notes: vec!["report only; rows with asymptotic = false are pre-asymptotic"],
                rows: &rows,
            };
            let text = match a.output.format {
                Format::Json => report::to_json(&config, &rep),
                Format::Csv => report::ratio_csv(&rows),
            };
            write_out(&a.output, &text)?;
            return Ok(0);
        }
    };
    let rep = match result {
        Ok(r) => r,
        Err(e) => return engine_err(e),
    };
    let text = match a.output.format {
        Format::Json => report::to_json(&config, &rep),
        Format::Csv => report::dominance_csv(&rep),
    };
    write_out(&a.output, &text)?;
    if rep.exploratory {
        eprintln!("note: exploratory run, the verdict carries no theorem");
    }
    Ok(rep.verdict.exit_code())
}

pub fn cmd_suite(a: &SuiteArgs) -> Result<i32, Usage> {
    let inject = a
        .inject
        .iter()
        .map(|s| expr::parse_dist(s).map_err(parse_err("inject")))
        .collect::<Result<Vec<_>, _>>()?;
    let opts = SuiteOptions {
        seed: a.seed,
        inject,
    };
    let config = suite_config(&opts, a.format);
    let outcomes = suite::run(&opts);
    suite::write(&outcomes, &config, &a.out, a.format)
        .map_err(|e| Usage(format!("cannot write suite reports: {e}")))?;
    for o in outcomes.iter().filter(|o| !o.ok) {
        eprintln!(
            "criterion {}: {} expected {} observed {} {}",
            o.criterion, o.id, o.expected, o.observed, o.detail
        );
    }
    Ok(if suite::all_ok(&outcomes) { 0 } else { 1 })
}

/// Configuration block embedded in every suite report.
pub fn suite_config(opts: &SuiteOptions, format: Format) -> RunConfig {
    RunConfig {
        command: "suite".into(),
        seed: Some(opts.seed),
        m: Some(suite::DEFAULT_M),
        delta: Some(dominance::DEFAULT_DELTA),
        tol: Some(membership::DEFAULT_TOL),
        grid: Some(Grid::default()),
        inject: (!opts.inject.is_empty())
            .then(|| opts.inject.iter().map(Distribution::expression).collect()),
        format: Some(format),
        ..RunConfig::default()
    }
}
