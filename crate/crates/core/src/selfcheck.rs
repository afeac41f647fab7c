//! Property suites that can be run from the command line against the
//! shipped operators: stationarity of log-thresholding, its dead zone and
//! soft/hard sandwich, monotone descent of the log iteration, and the
//! fixed-point conditions at converged iterates.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::experiments::{derive_seed, gen_sparse_problem};
use crate::linalg::Vector;
use crate::problem::SolverConfig;
use crate::solver::{
    fixed_point_tolerance, objective_f, solve_with_operator, surrogate_q, LambdaSchedule,
};
use crate::thresholding::{ThresholdKind, ThresholdRule};

/// λ used by the descent suite. Together with [`DESCENT_DELTA`] this puts
/// the dead zone (≈0.041) below δ, where the log operator is continuous and
/// every step minimizes the surrogate exactly.
pub const DESCENT_LAMBDA: f64 = 0.01;
pub const DESCENT_DELTA: f64 = 0.1;
/// Slack allowed on each descent comparison.
pub const DESCENT_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Stationarity,
    Sandwich,
    Monotonicity,
    FixedPoint,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Stationarity, Suite::Sandwich, Suite::Monotonicity, Suite::FixedPoint];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Stationarity => "stationarity",
            Suite::Sandwich => "sandwich",
            Suite::Monotonicity => "monotonicity",
            Suite::FixedPoint => "fixed-point",
        }
    }

    pub fn default_trials(self) -> usize {
        match self {
            Suite::Stationarity => 1000,
            Suite::Sandwich => 10_000,
            Suite::Monotonicity | Suite::FixedPoint => 20,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s || (s == "fixed_point" && *suite == Suite::FixedPoint))
            .ok_or_else(|| Error::invalid("suite", format!("unknown suite `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfCheckOptions {
    /// Overrides the suite's default trial count.
    pub trials: Option<usize>,
    pub seed: u64,
    /// Scales every thresholded value by 1.5, a negative control that every
    /// suite must catch.
    pub inject_fault: bool,
}

impl Default for SelfCheckOptions {
    fn default() -> Self {
        Self {
            trials: None,
            seed: 12345,
            inject_fault: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: usize,
    pub failures: usize,
    pub detail: String,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.checks > 0
    }
}

type Operator = dyn Fn(&ThresholdRule, f64) -> f64 + Sync;

fn operator(fault: bool) -> Box<Operator> {
    if fault {
        Box::new(|rule: &ThresholdRule, z: f64| 1.5 * rule.apply_scalar(z))
    } else {
        Box::new(|rule: &ThresholdRule, z: f64| rule.apply_scalar(z))
    }
}

/// Random log rule with λ ∈ [0.01, 2], δ ∈ [1e-4, 0.1] and `x₀ > δ`.
pub fn random_log_rule(rng: &mut impl Rng) -> ThresholdRule {
    loop {
        let lambda: f64 = rng.random_range(0.01..=2.0);
        let delta = rng.random_range(1e-4..=0.1);
        if (2.0 * lambda).sqrt() - delta > delta {
            return ThresholdRule::log(lambda, delta).expect("parameters drawn inside the valid range");
        }
    }
}

pub fn run_suite(suite: Suite, options: &SelfCheckOptions) -> Result<SuiteReport> {
    let trials = options.trials.unwrap_or(suite.default_trials());
    if trials == 0 {
        return Err(Error::invalid("trials", "must be at least 1"));
    }
    let op = operator(options.inject_fault);
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(options.seed, suite as u64, 0));
    match suite {
        Suite::Stationarity => {
            let mut failures = 0;
            let mut worst = 0.0_f64;
            for _ in 0..trials {
                let rule = random_log_rule(&mut rng);
                let offset = rng.random_range(1e-3..5.0);
                let z = if rng.random::<bool>() { 1.0 } else { -1.0 } * (rule.dead_zone() + offset);
                let l = op(&rule, z);
                let residual = 2.0 * (l - z) + rule.lambda() * l.signum() / (rule.delta() + l.abs());
                worst = worst.max(residual.abs());
                if l == 0.0 || !(residual.abs() < 1e-9) {
                    failures += 1;
                }
            }
            Ok(SuiteReport {
                suite,
                checks: trials,
                failures,
                detail: format!("max_residual={worst:e}"),
            })
        }
        Suite::Sandwich => {
            let mut failures = 0;
            for _ in 0..trials {
                let rule = random_log_rule(&mut rng);
                let z: f64 = rng.random_range(-5.0..5.0);
                let x0 = rule.dead_zone();
                let l = op(&rule, z);
                let dead_zone_ok = (l == 0.0) == (z.abs() <= x0);
                let sandwich_ok = z <= x0 || ((z - x0).max(0.0) <= l && l <= z);
                if !(dead_zone_ok && sandwich_ok) {
                    failures += 1;
                }
            }
            Ok(SuiteReport {
                suite,
                checks: trials,
                failures,
                detail: String::new(),
            })
        }
        Suite::Monotonicity => descent_suite(trials, options.seed, &*op),
        Suite::FixedPoint => fixed_point_suite(trials, options.seed, &*op, &mut rng),
    }
}

/// The seeded descent ensemble: `M = 100`, `N = 200`, `K = 10`, even trials
/// noiseless and odd trials with σ = 0.01.
pub fn descent_instance(seed: u64, trial: usize) -> Result<crate::problem::MeasurementProblem> {
    let sigma = if trial.is_multiple_of(2) { 0.0 } else { 0.01 };
    gen_sparse_problem(100, 200, 10, sigma, derive_seed(seed, 10, trial as u64))
}

struct DescentOutcome {
    steps: usize,
    violations: usize,
    converged: bool,
    fixed_point_ok: bool,
}

fn descent_run(seed: u64, trial: usize, op: &Operator) -> Result<DescentOutcome> {
    let problem = descent_instance(seed, trial)?;
    let config = SolverConfig::default();
    let schedule = LambdaSchedule::fixed(DESCENT_LAMBDA, DESCENT_DELTA);
    let result = match solve_with_operator(&problem, ThresholdKind::Log, schedule, &config, false, op) {
        Ok(r) => r,
        Err(Error::NumericalFailure { .. }) => {
            return Ok(DescentOutcome {
                steps: 1,
                violations: 1,
                converged: false,
                fixed_point_ok: false,
            })
        }
        Err(e) => return Err(e),
    };
    let mut previous = objective_f(&Vector::zeros(problem.cols()), &problem.a, &problem.y, DESCENT_LAMBDA, DESCENT_DELTA);
    let mut violations = 0;
    for record in &result.trace.records {
        if record.objective_f > previous + DESCENT_SLACK || record.surrogate > previous + DESCENT_SLACK {
            violations += 1;
        }
        previous = record.objective_f;
    }
    let tol = fixed_point_tolerance(config.step_tol);
    Ok(DescentOutcome {
        steps: result.trace.len(),
        violations,
        converged: result.converged,
        fixed_point_ok: result.fixed_point.passes && result.fixed_point.tol <= tol,
    })
}

fn descent_suite(trials: usize, seed: u64, op: &Operator) -> Result<SuiteReport> {
    let outcomes: Vec<DescentOutcome> =
        (0..trials).into_par_iter().map(|t| descent_run(seed, t, op)).collect::<Result<_>>()?;
    Ok(SuiteReport {
        suite: Suite::Monotonicity,
        checks: outcomes.iter().map(|o| o.steps).sum(),
        failures: outcomes.iter().map(|o| o.violations).sum(),
        detail: format!("instances={trials}"),
    })
}

fn fixed_point_suite(trials: usize, seed: u64, op: &Operator, rng: &mut ChaCha8Rng) -> Result<SuiteReport> {
    let outcomes: Vec<DescentOutcome> =
        (0..trials).into_par_iter().map(|t| descent_run(seed, t, op)).collect::<Result<_>>()?;
    let converged = outcomes.iter().filter(|o| o.converged).count();
    let mut failures = outcomes.iter().filter(|o| o.converged && !o.fixed_point_ok).count();
    if converged == 0 {
        failures += 1;
    }

    // Q(x, x) = f(x) at random points of a random instance
    let problem = descent_instance(seed, 0)?;
    let identity_points = 1000;
    for _ in 0..identity_points {
        let x = Vector::from_fn(problem.cols(), |_, _| rng.sample::<f64, _>(StandardNormal));
        let f = objective_f(&x, &problem.a, &problem.y, DESCENT_LAMBDA, DESCENT_DELTA);
        let q = surrogate_q(&x, &x, &problem.a, &problem.y, DESCENT_LAMBDA, DESCENT_DELTA);
        if (q - f).abs() > 1e-12 * (1.0 + f.abs()) {
            failures += 1;
        }
    }
    Ok(SuiteReport {
        suite: Suite::FixedPoint,
        checks: converged + identity_points,
        failures,
        detail: format!("converged={converged}/{trials}"),
    })
}
