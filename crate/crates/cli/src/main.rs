//! `logshrink` command-line driver.

mod output;
mod range;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use logshrink::experiments::{
    run_completion_bench, run_noiseless_sweep, run_noisy_path, EnsembleSpec, MetricsRow, DEFAULT_DELTA,
};
use logshrink::selfcheck::{run_suite, SelfCheckOptions, Suite};
use logshrink::solver::check_delta_condition;
use logshrink::{Error, ThresholdKind, ThresholdRule};

const THREADS_ENV: &str = "LOGSHRINK_THREADS";

#[derive(Debug, Parser)]
#[command(name = "logshrink", version, about = "Iterative thresholding experiments for sparse recovery and matrix completion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact-recovery probability and mean error versus sparsity (noiseless).
    Phase(PhaseArgs),
    /// Mean squared residual versus enforced sparsity on noisy instances.
    NoisyPath(PathArgs),
    /// Mean Frobenius error per iteration of singular-value thresholding.
    Complete(CompleteArgs),
    /// Apply one scalar thresholding operator and report its parameters.
    Threshold(ThresholdArgs),
    /// Run the built-in property suites.
    Selfcheck(SelfcheckArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// Trials per sweep point.
    #[arg(long)]
    trials: Option<usize>,
    /// Iterations per solve.
    #[arg(long, default_value_t = 250)]
    iters: usize,
    /// Offset δ of the log rule.
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    delta: f64,
    #[arg(long, default_value_t = 12345)]
    seed: u64,
    /// Directory receiving the CSV file.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Debug, Args)]
struct PhaseArgs {
    #[arg(long = "M", default_value_t = 100)]
    m: usize,
    #[arg(long = "N", default_value_t = 200)]
    n: usize,
    /// Sparsity grid, `start:stop[:step]` or a comma list.
    #[arg(long = "K", default_value = "10:60:10", value_parser = range::parse_grid)]
    k: std::vec::Vec<usize>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct PathArgs {
    #[arg(long = "M", default_value_t = 100)]
    m: usize,
    #[arg(long = "N", default_value_t = 200)]
    n: usize,
    /// Sparsity of the ground-truth signal.
    #[arg(long = "K-true", default_value_t = 10)]
    k_true: usize,
    /// Enforced-sparsity grid.
    #[arg(long = "k", default_value = "1:30", value_parser = range::parse_grid)]
    k: std::vec::Vec<usize>,
    /// Measurement noise standard deviation.
    #[arg(long, default_value_t = 0.01)]
    noise: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct CompleteArgs {
    #[arg(long = "N", default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    rank: usize,
    /// Fraction of observed entries.
    #[arg(long, default_value_t = 0.3)]
    obs: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct ThresholdArgs {
    #[arg(long)]
    kind: ThresholdKind,
    /// Input value.
    #[arg(long, allow_negative_numbers = true)]
    x: f64,
    /// λ for soft and log, the threshold t for hard.
    #[arg(long)]
    lambda: f64,
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    delta: f64,
}

#[derive(Debug, Args)]
struct SelfcheckArgs {
    /// One of stationarity, sandwich, monotonicity, fixed-point, or all.
    #[arg(long, default_value = "all")]
    suite: String,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, default_value_t = 12345)]
    seed: u64,
    /// Perturb the operator under test (negative control).
    #[arg(long, hide = true)]
    inject_fault: bool,
}

enum Failure {
    Usage(String),
    Numerical(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Numerical(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Numerical(m) => m,
        }
    }
}

fn flag_name(param: &str) -> String {
    match param {
        "k-grid" => "--k".to_string(),
        other => format!("--{other}"),
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter { name, reason } => Failure::Usage(format!("invalid {}: {reason}", flag_name(name))),
            Error::DimensionMismatch { .. } => Failure::Usage(e.to_string()),
            other => Failure::Numerical(other.to_string()),
        }
    }
}

fn usage(flag: &str, reason: impl std::fmt::Display) -> Failure {
    Failure::Usage(format!("invalid {flag}: {reason}"))
}

fn thread_count() -> Result<usize, Failure> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(0),
        Ok(v) if v.trim().is_empty() => Ok(0),
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("{THREADS_ENV} must be a nonnegative integer, got `{v}`"))),
    }
}

fn emit(dir: &Path, name: &str, coord_column: &str, rows: &[MetricsRow]) -> Result<(), Failure> {
    if let Some(row) = rows.iter().find(|r| !r.value.is_finite()) {
        return Err(Failure::Numerical(format!(
            "non-finite {} for {} at {coord_column} {}",
            row.value_kind.as_str(),
            row.algorithm_label(),
            row.sweep_coord
        )));
    }
    let csv = output::render_csv(coord_column, rows);
    let path = output::write_atomic(dir, name, &csv)
        .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", dir.join(name).display())))?;
    println!("wrote {} rows to {}", rows.len(), path.display());
    Ok(())
}

fn ensemble(m: usize, n: usize, k_grid: Vec<usize>, noise: f64, trials: usize, common: &Common) -> EnsembleSpec {
    EnsembleSpec {
        m,
        n,
        k_grid,
        trials,
        noise_sigma: noise,
        max_iters: common.iters,
        master_seed: common.seed,
        algorithms: ThresholdKind::ALL.to_vec(),
        delta: common.delta,
    }
}

fn cmd_phase(args: PhaseArgs) -> Result<(), Failure> {
    let spec = ensemble(args.m, args.n, args.k, 0.0, args.common.trials.unwrap_or(100), &args.common);
    spec.validate()?;
    let rows = run_noiseless_sweep(&spec)?;
    emit(&args.common.out_dir, "phase.csv", "K", &rows)
}

fn cmd_noisy_path(args: PathArgs) -> Result<(), Failure> {
    if !(args.noise > 0.0 && args.noise.is_finite()) {
        return Err(usage("--noise", "the noisy path needs noise > 0; use `phase` for noiseless runs"));
    }
    if args.k_true > args.n {
        return Err(usage("--K-true", format!("must be at most N = {}", args.n)));
    }
    if let Some(k) = args.k.iter().find(|&&k| k >= args.n) {
        return Err(usage("--k", format!("sparsity {k} must be below N = {}", args.n)));
    }
    let spec = ensemble(args.m, args.n, vec![args.k_true], args.noise, args.common.trials.unwrap_or(50), &args.common);
    spec.validate()?;
    let rows = run_noisy_path(&spec, args.k_true, &args.k)?;
    emit(&args.common.out_dir, "path.csv", "sparsity_k", &rows)
}

fn cmd_complete(args: CompleteArgs) -> Result<(), Failure> {
    let trials = args.common.trials.unwrap_or(50);
    if args.n == 0 {
        return Err(usage("--N", "must be positive"));
    }
    if args.rank == 0 || args.rank > args.n {
        return Err(usage("--rank", format!("must lie in 1..={}", args.n)));
    }
    if !(args.obs > 0.0 && args.obs <= 1.0) {
        return Err(usage("--obs", format!("must lie in (0, 1], got {}", args.obs)));
    }
    if trials == 0 {
        return Err(usage("--trials", "must be at least 1"));
    }
    if args.common.iters == 0 {
        return Err(usage("--iters", "must be at least 1"));
    }
    if !(args.common.delta > 0.0 && args.common.delta.is_finite()) {
        return Err(usage("--delta", "must be positive"));
    }
    let c = &args.common;
    let rows = run_completion_bench(args.n, args.rank, args.obs, trials, c.iters, c.seed, c.delta)?;
    emit(&c.out_dir, "completion.csv", "iteration", &rows)
}

fn cmd_threshold(args: ThresholdArgs) -> Result<(), Failure> {
    if !args.x.is_finite() {
        return Err(usage("--x", "must be finite"));
    }
    let rule = match args.kind {
        ThresholdKind::Soft => ThresholdRule::soft(args.lambda),
        ThresholdKind::Hard => ThresholdRule::hard(args.lambda),
        ThresholdKind::Log => ThresholdRule::log(args.lambda, args.delta),
    }
    .map_err(|e| match e {
        Error::InvalidParameter { name, reason } => usage(&flag_name(name), reason),
        other => Failure::from(other),
    })?;
    println!("kind={}", rule.kind());
    println!("value={}", rule.apply_scalar(args.x));
    if rule.kind() == ThresholdKind::Log {
        let report = check_delta_condition(rule.lambda(), rule.delta());
        println!("x0={}", rule.dead_zone());
        println!("delta_condition_lhs={}", report.lhs);
        println!("delta_condition_rhs={}", report.rhs);
        println!("delta_condition_satisfied={}", report.satisfied);
    }
    Ok(())
}

fn cmd_selfcheck(args: SelfcheckArgs) -> Result<(), Failure> {
    let suites: Vec<Suite> = if args.suite == "all" {
        Suite::ALL.to_vec()
    } else {
        vec![args.suite.parse().map_err(|_| usage("--suite", format!("unknown suite `{}`", args.suite)))?]
    };
    if args.trials == Some(0) {
        return Err(usage("--trials", "must be at least 1"));
    }
    let options = SelfCheckOptions {
        trials: args.trials,
        seed: args.seed,
        inject_fault: args.inject_fault,
    };
    let mut failed = Vec::new();
    for suite in suites {
        let report = run_suite(suite, &options)?;
        let status = if report.passed() { "PASS" } else { "FAIL" };
        println!(
            "[{status}] {suite}: {} checks, {} failures{}",
            report.checks, report.failures, if report.detail.is_empty() { String::new() } else { format!(" ({})", report.detail) }
        );
        if !report.passed() {
            failed.push(suite.name());
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Numerical(format!("failing suites: {}", failed.join(", "))))
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let threads = thread_count()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Failure::Numerical(format!("cannot start worker threads: {e}")))?;
    pool.install(|| match cli.command {
        Command::Phase(a) => cmd_phase(a),
        Command::NoisyPath(a) => cmd_noisy_path(a),
        Command::Complete(a) => cmd_complete(a),
        Command::Threshold(a) => cmd_threshold(a),
        Command::Selfcheck(a) => cmd_selfcheck(a),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}
