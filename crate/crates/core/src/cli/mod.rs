//! Command-line front end of the `mlei-bo` binary.
//!
//! Exit codes: 0 on success, 2 on usage errors (bad flags, malformed inputs),
//! 1 on runtime failures. Output files are written atomically, so a failing
//! command never leaves a partial file behind. Set `MLEI_BO_LOG` to `info` or
//! `debug` for diagnostics on stderr; results never depend on it.

pub mod config;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::benchmarks::{
    adaptation_rows, build_arm_priors, generate_condition_map, repertoire_config, replicate_seed,
    run_arm_experiment, run_map_adaptation_experiment, AdaptationOptions, ArmConfig,
    ArmExperimentOptions, ArmVariant, Condition, MapAdaptationTask, DEFAULT_TARGET,
};
use crate::bo::{run_bo, BoRunConfig, SelectorPolicy};
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::gp::KernelParams;
use crate::priors::{BehaviorMap, GridSpec, PriorMean};
use crate::results::{read_csv, rows_from_records, to_csv_string, ResultRow};
use crate::rng::{derive_seed, Stream};
use crate::stats::{
    final_episode, mann_whitney_u, significance_stars, summarize, values_at, Alternative, Metric,
    TestMethod,
};
use config::{ExperimentConfig, ExperimentKind, Objective, PriorSpec};

#[derive(Debug, Parser)]
#[command(
    name = "mlei-bo",
    version,
    about = "Bayesian optimization over several candidate prior means",
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Planar-arm reaching benchmark for the listed variants.
    BenchArm(BenchArmArgs),
    /// Illuminate a behavior map of the arm with MAP-Elites.
    GenMap(GenMapArgs),
    /// Damage adaptation over behavior-map priors.
    Adapt(AdaptArgs),
    /// Per-episode summaries and pairwise rank tests of a result table.
    Stats(StatsArgs),
    /// Run an experiment described by a configuration file.
    Bo(BoArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long, default_value_t = 30)]
    replicates: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    episodes: usize,
    #[arg(long, default_value_t = 3)]
    init_trials: usize,
    #[arg(long, default_value_t = crate::gp::rprop::DEFAULT_ITERATIONS)]
    hyperopt_iters: usize,
    /// Worker threads for replicates (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Output CSV (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArmArgs {
    /// Comma-separated subset of ei_null, ei_const_-7, ei_random_prior, mlei.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "ei_null,ei_const_-7,ei_random_prior,mlei"
    )]
    variants: Vec<String>,
    /// Reaching target `X,Y`.
    #[arg(
        long,
        value_delimiter = ',',
        allow_negative_numbers = true,
        num_args = 1
    )]
    target: Option<Vec<f64>>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Debug, Args)]
struct GenMapArgs {
    /// `intact` or `lock:J[,K...]`.
    #[arg(long, default_value = "intact")]
    condition: String,
    #[arg(long, default_value_t = crate::map_elites::DEFAULT_BUDGET)]
    budget: usize,
    /// Random individuals before mutation starts.
    #[arg(long, default_value_t = crate::map_elites::DEFAULT_INIT_COUNT)]
    init: usize,
    /// Cells per descriptor axis over [-5, 5].
    #[arg(long, default_value_t = 20)]
    res: usize,
    /// Mutation standard deviation as a fraction of each parameter range.
    #[arg(long, default_value_t = crate::map_elites::DEFAULT_MUTATION_SIGMA)]
    mutation: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct AdaptArgs {
    /// Prior map files, comma-separated or repeated.
    #[arg(long, value_delimiter = ',', required = true)]
    priors: Vec<PathBuf>,
    /// Condition of the arm that is actually run.
    #[arg(long)]
    condition: String,
    /// Repertoire of the true condition; generated from the seed when absent.
    #[arg(long)]
    true_map: Option<PathBuf>,
    /// MAP-Elites budget used when the true map is generated.
    #[arg(long, default_value_t = crate::map_elites::DEFAULT_BUDGET)]
    map_budget: usize,
    #[arg(
        long,
        value_delimiter = ',',
        allow_negative_numbers = true,
        num_args = 1
    )]
    target: Option<Vec<f64>>,
    /// Selectors: mlei, random, fixed:I.
    #[arg(long, value_delimiter = ',', default_value = "mlei,random")]
    variants: Vec<String>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Debug, Args)]
struct StatsArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Variants to compare; repeatable. Defaults to every pair.
    #[arg(long, num_args = 2, value_names = ["A", "B"], action = clap::ArgAction::Append)]
    pair: Vec<String>,
    /// Episode of the comparison (default: the last episode of both variants).
    #[arg(long)]
    at_episode: Option<usize>,
    /// best_so_far, reward, distance or best_distance.
    #[arg(long, default_value = "best_so_far")]
    metric: String,
    /// two-sided, greater or less.
    #[arg(long, default_value = "two-sided")]
    alternative: String,
    /// Report file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BoArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the `jobs` key of the configuration.
    #[arg(long)]
    jobs: Option<usize>,
    /// Overrides the `out` key of the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    init_logging();
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
        }
    };
    match run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("mlei-bo: {e}");
            if e.is_usage() {
                2
            } else {
                1
            }
        }
    }
}

fn init_logging() {
    let level = match std::env::var("MLEI_BO_LOG").as_deref() {
        Ok("info") => log::LevelFilter::Info,
        Ok("debug") => log::LevelFilter::Debug,
        Ok("off") | Ok("") | Err(_) => log::LevelFilter::Off,
        Ok(other) => {
            eprintln!("mlei-bo: ignoring MLEI_BO_LOG={other:?} (expected off, info or debug)");
            log::LevelFilter::Off
        }
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .target(env_logger::Target::Stderr)
        .try_init();
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::BenchArm(a) => bench_arm(a),
        Command::GenMap(a) => gen_map(a),
        Command::Adapt(a) => adapt(a),
        Command::Stats(a) => stats(a),
        Command::Bo(a) => bo(a),
    }
}

/// Runs `f` on a pool of `jobs` threads, or on the global pool.
fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match jobs {
        None => f(),
        Some(0) => Err(Error::Usage("--jobs must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Numerical(format!("cannot start thread pool: {e}")))?
            .install(f),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => crate::io::write_atomic(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn target_of(t: Option<&[f64]>) -> Result<[f64; 2]> {
    match t {
        None => Ok(DEFAULT_TARGET),
        Some([x, y]) if x.is_finite() && y.is_finite() => Ok([*x, *y]),
        Some(_) => Err(Error::Usage(
            "--target needs two finite coordinates X,Y".into(),
        )),
    }
}

fn check_run(run: &RunArgs) -> Result<()> {
    if run.replicates == 0 || run.episodes == 0 {
        return Err(Error::Usage(
            "--replicates and --episodes must be at least 1".into(),
        ));
    }
    Ok(())
}

fn bench_arm(a: BenchArmArgs) -> Result<()> {
    check_run(&a.run)?;
    let variants = a
        .variants
        .iter()
        .map(|v| ArmVariant::parse(v))
        .collect::<Result<Vec<_>>>()?;
    let opts = ArmExperimentOptions {
        replicates: a.run.replicates,
        episodes: a.run.episodes,
        init_trials: a.run.init_trials,
        seed: a.run.seed,
        hyperopt_iters: a.run.hyperopt_iters,
        arm: ArmConfig::default().with_target(target_of(a.target.as_deref())?),
        ..ArmExperimentOptions::default()
    };
    let rows = with_jobs(a.run.jobs, || {
        let mut rows = Vec::new();
        for v in &variants {
            log::info!(
                "bench-arm: variant {} ({} replicates)",
                v.name(),
                opts.replicates
            );
            rows.extend(run_arm_experiment(*v, &opts)?);
        }
        Ok(rows)
    })?;
    emit(a.run.out.as_deref(), &to_csv_string(&rows)?)
}

fn gen_map(a: GenMapArgs) -> Result<()> {
    let cond = Condition::parse(&a.condition)?;
    let mut cfg = repertoire_config(a.seed);
    cfg.grid = GridSpec::uniform(2, -5.0, 5.0, a.res)?;
    cfg.budget = a.budget;
    cfg.init_count = a.init;
    cfg.mutation_sigma = a.mutation;
    log::info!("gen-map: condition {} budget {}", cond.name, cfg.budget);
    let map = generate_condition_map(&cond.arm, &cfg)?;
    log::info!("gen-map: {} cells filled", map.len());
    map.save(&a.out)
}

fn load_map(path: &Path) -> Result<BehaviorMap> {
    BehaviorMap::load(path).map_err(|e| match e {
        Error::Parse { line, message } => {
            Error::Usage(format!("{}: line {line}: {message}", path.display()))
        }
        other => other,
    })
}

/// True condition map: loaded, or generated on the true arm from a stream of the seed.
fn true_condition_map(
    path: Option<&Path>,
    cond: &Condition,
    seed: u64,
    budget: usize,
    grid: &GridSpec,
) -> Result<BehaviorMap> {
    if let Some(p) = path {
        return load_map(p);
    }
    let mut cfg = repertoire_config(derive_seed(seed, Stream::MapElites, &[]));
    cfg.grid = grid.clone();
    cfg.budget = budget;
    cfg.init_count = cfg.init_count.min(budget);
    log::info!("adapt: generating the true map for {}", cond.name);
    generate_condition_map(&cond.arm, &cfg)
}

fn adaptation_variants(names: &[String]) -> Result<Vec<(String, SelectorPolicy)>> {
    names
        .iter()
        .map(|n| Ok((n.trim().to_string(), SelectorPolicy::parse(n)?)))
        .collect()
}

fn check_selectors(variants: &[(String, SelectorPolicy)], prior_count: usize) -> Result<()> {
    for (name, s) in variants {
        if let SelectorPolicy::FixedPrior(i) = s {
            if *i >= prior_count {
                return Err(Error::Usage(format!(
                    "variant {name}: prior index {i} out of range ({prior_count} priors)"
                )));
            }
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run_adaptation(
    map_paths: &[PathBuf],
    condition: &str,
    true_map: Option<&Path>,
    map_budget: usize,
    target: [f64; 2],
    variants: &[(String, SelectorPolicy)],
    opts: &AdaptationOptions,
    jobs: Option<usize>,
) -> Result<Vec<ResultRow>> {
    let priors = map_paths
        .iter()
        .map(|p| load_map(p))
        .collect::<Result<Vec<_>>>()?;
    check_selectors(variants, priors.len())?;
    let cond = Condition::parse(condition)?;
    let grid = priors
        .first()
        .map(|m| m.grid().clone())
        .ok_or_else(|| Error::Usage("no prior maps".into()))?;
    with_jobs(jobs, || {
        let truth = true_condition_map(true_map, &cond, opts.seed, map_budget, &grid)?;
        let task = MapAdaptationTask::new(priors, cond.arm.clone(), truth, target)?;
        let mut rows = Vec::new();
        for (name, selector) in variants {
            log::info!("adapt: variant {name}");
            let runs = run_map_adaptation_experiment(&task, *selector, opts)?;
            rows.extend(adaptation_rows(name, &runs));
        }
        Ok(rows)
    })
}

fn adapt(a: AdaptArgs) -> Result<()> {
    check_run(&a.run)?;
    let variants = adaptation_variants(&a.variants)?;
    let opts = AdaptationOptions {
        replicates: a.run.replicates,
        episodes: a.run.episodes,
        init_trials: a.run.init_trials,
        seed: a.run.seed,
        hyperopt_iters: a.run.hyperopt_iters,
        ..AdaptationOptions::default()
    };
    let rows = run_adaptation(
        &a.priors,
        &a.condition,
        a.true_map.as_deref(),
        a.map_budget,
        target_of(a.target.as_deref())?,
        &variants,
        &opts,
        a.run.jobs,
    )?;
    emit(a.run.out.as_deref(), &to_csv_string(&rows)?)
}

/// Text report: per-episode summary table, then one rank test per pair.
pub fn stats_report(
    rows: &[ResultRow],
    pairs: &[(String, String)],
    at_episode: Option<usize>,
    metric: Metric,
    alternative: Alternative,
) -> Result<String> {
    let summary = summarize(rows, metric)?;
    let mut variants: Vec<String> = Vec::new();
    for r in rows {
        if !variants.contains(&r.variant) {
            variants.push(r.variant.clone());
        }
    }
    let pairs: Vec<(String, String)> = if pairs.is_empty() {
        let mut all = Vec::new();
        for i in 0..variants.len() {
            for j in i + 1..variants.len() {
                all.push((variants[i].clone(), variants[j].clone()));
            }
        }
        all
    } else {
        pairs.to_vec()
    };

    let mut out = String::new();
    let _ = writeln!(out, "# metric: {}", metric.name());
    out.push_str("variant,episode,count,median,q1,q3,min,max\n");
    for s in &summary {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            s.variant, s.episode, s.count, s.median, s.q1, s.q3, s.min, s.max
        );
    }
    if pairs.is_empty() {
        return Ok(out);
    }
    let _ = writeln!(out, "\n# Mann-Whitney U, {}", alternative.name());
    out.push_str("a,b,episode,n1,n2,u,p_value,method,significance\n");
    for (a, b) in &pairs {
        for v in [a, b] {
            if !variants.contains(v) {
                return Err(Error::Usage(format!(
                    "variant {v:?} not found in the result table"
                )));
            }
        }
        let episode = match at_episode {
            Some(e) => e,
            None => final_episode(rows, a)
                .zip(final_episode(rows, b))
                .map(|(x, y)| x.min(y))
                .ok_or_else(|| Error::Usage("no episodes to compare".into()))?,
        };
        let xa = values_at(rows, a, episode, metric)?;
        let xb = values_at(rows, b, episode, metric)?;
        let t = mann_whitney_u(&xa, &xb, alternative)?;
        let method = match t.method {
            TestMethod::Exact => "exact",
            TestMethod::NormalApproximation => "normal",
        };
        let _ = writeln!(
            out,
            "{a},{b},{episode},{},{},{},{},{method},{}",
            t.n1,
            t.n2,
            t.u_statistic,
            t.p_value,
            significance_stars(t.p_value)
        );
    }
    Ok(out)
}

fn stats(a: StatsArgs) -> Result<()> {
    let metric = Metric::parse(&a.metric)?;
    let alternative = Alternative::parse(&a.alternative)?;
    let rows = read_csv(&a.input)?;
    let pairs: Vec<(String, String)> = a
        .pair
        .chunks(2)
        .map(|p| (p[0].clone(), p[1].clone()))
        .collect();
    let report = stats_report(&rows, &pairs, a.at_episode, metric, alternative)?;
    emit(a.out.as_deref(), &report)
}

fn kernel_from(cfg: &ExperimentConfig, dim: usize) -> Result<KernelParams> {
    let lengths = match cfg.kernel_length.len() {
        1 => vec![cfg.kernel_length[0]; dim],
        n if n == dim => cfg.kernel_length.clone(),
        n => {
            return Err(Error::Usage(format!(
                "kernel_length has {n} entries, expected 1 or {dim}"
            )))
        }
    };
    KernelParams::new(cfg.kernel_signal, lengths, cfg.noise)
}

fn prior_means(specs: &[PriorSpec], seed: u64) -> Vec<PriorMean> {
    specs
        .iter()
        .flat_map(|s| match s {
            PriorSpec::Zero => vec![PriorMean::Zero],
            PriorSpec::Constant(c) => vec![PriorMean::Constant(*c)],
            PriorSpec::ArmTarget(t) => vec![PriorMean::arm_target(*t)],
            PriorSpec::ArmSet => build_arm_priors(seed),
        })
        .collect()
}

/// Replicates of one variant on a generic objective, in replicate order.
fn run_generic(
    name: &str,
    cfg: &ExperimentConfig,
    domain: &Domain,
    priors: Vec<PriorMean>,
    selector: SelectorPolicy,
    objective: &(dyn Fn(&[f64]) -> f64 + Sync),
) -> Result<Vec<ResultRow>> {
    if let SelectorPolicy::FixedPrior(i) = selector {
        if i >= priors.len() {
            return Err(Error::Usage(format!(
                "variant {name}: prior index {i} out of range"
            )));
        }
    }
    let kernel = kernel_from(cfg, domain.dim())?;
    let per_rep: Vec<Vec<ResultRow>> = (0..cfg.replicates)
        .into_par_iter()
        .map(|rep| {
            let mut bo = BoRunConfig::new(domain.clone(), priors.clone(), selector);
            bo.init_trials = cfg.init_trials;
            bo.max_iterations = cfg.episodes;
            bo.seed = replicate_seed(cfg.seed, rep);
            bo.kernel_init = kernel.clone();
            bo.hyperopt_iters = cfg.hyperopt_iters;
            let records = run_bo(&bo, objective)?;
            Ok(rows_from_records(name, rep, &records))
        })
        .collect::<Result<_>>()?;
    Ok(per_rep.into_iter().flatten().collect())
}

fn custom_objective(
    cfg: &ExperimentConfig,
) -> Result<(Domain, Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>)> {
    let dim = cfg.dim.unwrap_or(0);
    if dim == 0 {
        return Err(Error::Usage("dim must be at least 1".into()));
    }
    let (lo, hi) = (cfg.lo.unwrap_or(-5.0), cfg.hi.unwrap_or(5.0));
    let domain = Domain::continuous(vec![lo; dim], vec![hi; dim])?;
    let center = cfg.center.clone().unwrap_or_else(|| vec![0.0; dim]);
    if center.len() != dim {
        return Err(Error::Usage(format!(
            "center has {} entries, expected {dim}",
            center.len()
        )));
    }
    let f: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync> = match cfg.objective {
        Some(Objective::Sphere) => Arc::new(move |x: &[f64]| {
            -x.iter()
                .zip(&center)
                .map(|(a, c)| (a - c).powi(2))
                .sum::<f64>()
        }),
        Some(Objective::Rastrigin) | None => Arc::new(move |x: &[f64]| {
            let s: f64 = x
                .iter()
                .zip(&center)
                .map(|(a, c)| {
                    let d = a - c;
                    d * d - 10.0 * (2.0 * std::f64::consts::PI * d).cos()
                })
                .sum();
            -(10.0 * x.len() as f64 + s)
        }),
    };
    Ok((domain, f))
}

/// Runs every variant of a parsed configuration and returns the result table.
pub fn run_config(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    with_jobs(cfg.jobs, || {
        let mut rows = Vec::new();
        match cfg.kind {
            ExperimentKind::Arm => {
                let arm = ArmConfig::default().with_target(cfg.target.unwrap_or(DEFAULT_TARGET));
                let arm_priors = build_arm_priors(cfg.seed);
                for v in &cfg.variants {
                    let (priors, selector) = match v.preset {
                        Some(p) => p.priors_and_selector(&arm_priors),
                        None => (
                            prior_means(
                                v.priors.as_deref().unwrap_or(&[PriorSpec::Zero]),
                                cfg.seed,
                            ),
                            v.selector.unwrap_or(SelectorPolicy::FixedPrior(0)),
                        ),
                    };
                    let objective = |x: &[f64]| arm.reward(x).unwrap_or(f64::NAN);
                    log::info!("bo: arm variant {}", v.name);
                    rows.extend(run_generic(
                        &v.name,
                        cfg,
                        &arm.joint_domain(),
                        priors,
                        selector,
                        &objective,
                    )?);
                }
            }
            ExperimentKind::MapAdaptation => {
                let variants: Vec<(String, SelectorPolicy)> = cfg
                    .variants
                    .iter()
                    .map(|v| (v.name.clone(), v.selector.unwrap_or(SelectorPolicy::Mlei)))
                    .collect();
                let mut opts = AdaptationOptions {
                    replicates: cfg.replicates,
                    episodes: cfg.episodes,
                    init_trials: cfg.init_trials,
                    seed: cfg.seed,
                    hyperopt_iters: cfg.hyperopt_iters,
                    ..AdaptationOptions::default()
                };
                opts.kernel_init = kernel_from(cfg, 2)?;
                rows = run_adaptation(
                    &cfg.maps,
                    cfg.condition.as_deref().unwrap_or("intact"),
                    cfg.true_map.as_deref(),
                    cfg.map_budget.unwrap_or(crate::map_elites::DEFAULT_BUDGET),
                    cfg.target.unwrap_or(DEFAULT_TARGET),
                    &variants,
                    &opts,
                    None,
                )?;
            }
            ExperimentKind::Custom => {
                let (domain, f) = custom_objective(cfg)?;
                for v in &cfg.variants {
                    let priors =
                        prior_means(v.priors.as_deref().unwrap_or(&[PriorSpec::Zero]), cfg.seed);
                    let selector = v.selector.unwrap_or(SelectorPolicy::Mlei);
                    log::info!("bo: custom variant {}", v.name);
                    rows.extend(run_generic(&v.name, cfg, &domain, priors, selector, &*f)?);
                }
            }
        }
        Ok(rows)
    })
}

fn bo(a: BoArgs) -> Result<()> {
    let mut cfg = ExperimentConfig::load(&a.config)?;
    if a.jobs.is_some() {
        cfg.jobs = a.jobs;
    }
    if a.out.is_some() {
        cfg.out = a.out;
    }
    let rows = run_config(&cfg)?;
    emit(cfg.out.as_deref(), &to_csv_string(&rows)?)
}
