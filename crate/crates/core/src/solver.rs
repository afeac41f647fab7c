//! Iterative thresholding for sparse recovery.
//!
//! All three algorithms share one loop, starting from `x⁰ = 0`:
//!
//! ```text
//! x ← rule(x + Aᵀ(y − A x))
//! ```
//!
//! and differ only in the thresholding rule. Soft thresholding gives IST,
//! hard thresholding IHT, and log-thresholding ILT. The rule's parameters are
//! either fixed or recomputed every iteration so that only the `K` largest
//! entries survive.
//!
//! The diagnostics in this module check the properties the iteration is
//! expected to have when `‖A‖₂ < 1`: descent of the log-regularized
//! objective and its surrogate, the stationarity conditions at fixed points,
//! and the conditioning test for a fixed point to be a local minimum.

use crate::error::{Error, Result};
use crate::linalg::{nnz, spectral_norm, sup_norm, DenseMatrix, Vector};
use crate::problem::{MeasurementProblem, SolverConfig};
use crate::thresholding::{
    params_for_topk_with, DeltaConditionReport, ThresholdKind, ThresholdRule,
    TopKLogLambda,
};

/// How the thresholding parameters are chosen at each iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaSchedule {
    /// The same λ (threshold `t` for hard/soft) at every iteration.
    Fixed { lambda: f64, delta: f64 },
    /// λ recomputed from each gradient step so that only the top `k`
    /// magnitudes survive.
    TopK {
        k: usize,
        delta: f64,
        log_lambda: TopKLogLambda,
    },
}

impl LambdaSchedule {
    pub fn fixed(lambda: f64, delta: f64) -> Self {
        LambdaSchedule::Fixed { lambda, delta }
    }

    pub fn top_k(k: usize, delta: f64) -> Self {
        LambdaSchedule::TopK {
            k,
            delta,
            log_lambda: TopKLogLambda::default(),
        }
    }

    pub fn delta(&self) -> f64 {
        match *self {
            LambdaSchedule::Fixed { delta, .. } | LambdaSchedule::TopK { delta, .. } => delta,
        }
    }
}

/// One iteration's worth of diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterateRecord {
    /// Regularized objective at the new iterate, for the rule in force.
    pub objective_f: f64,
    /// Surrogate `Q(x⁺, x)`, which should not exceed the previous objective.
    pub surrogate: f64,
    pub residual_sq: f64,
    pub nnz: usize,
    /// `‖x⁺ − x‖∞`.
    pub step_delta: f64,
    /// `‖x⁺ − x‖²`.
    pub step_sq: f64,
    /// λ (or threshold) used for this iteration.
    pub lambda: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IterateTrace {
    pub records: Vec<IterateRecord>,
    /// Iterates after each step, only filled when snapshots are requested.
    pub snapshots: Vec<Vector>,
}

impl IterateTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Stationarity report at a candidate fixed point.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointReport {
    /// Correlations `sᵢ = aᵢᵀ(y − A x̄)`.
    pub s: Vector,
    pub support: Vec<usize>,
    pub off_support: Vec<usize>,
    pub max_support_violation: f64,
    pub max_offsupport_excess: f64,
    pub tol: f64,
    pub passes: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub x_hat: Vector,
    pub iterations_run: usize,
    pub converged: bool,
    pub trace: IterateTrace,
    /// Rule in force at the final iteration.
    pub final_rule: ThresholdRule,
    pub fixed_point: FixedPointReport,
}

/// Result of the local-minimum conditioning test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalMinReport {
    /// Smallest singular value of the support columns; `None` for an empty
    /// support.
    pub min_singular: Option<f64>,
    pub spectral_norm: f64,
    pub passes: bool,
}

fn check_dims(a: &DenseMatrix, x: &Vector, y: &Vector) -> Result<()> {
    if x.len() != a.ncols() {
        return Err(Error::DimensionMismatch {
            what: "x length vs A cols",
            expected: a.ncols(),
            actual: x.len(),
        });
    }
    if y.len() != a.nrows() {
        return Err(Error::DimensionMismatch {
            what: "y length vs A rows",
            expected: a.nrows(),
            actual: y.len(),
        });
    }
    Ok(())
}

/// `x + Aᵀ(y − A x)`, the unit-step gradient move on `‖y − A x‖²/2`.
pub fn gradient_step(x: &Vector, a: &DenseMatrix, y: &Vector) -> Result<Vector> {
    check_dims(a, x, y)?;
    Ok(x + a.tr_mul(&(y - a * x)))
}

fn log_penalty(x: &Vector, delta: f64) -> f64 {
    x.iter().map(|v| (delta + v.abs()).ln()).sum()
}

/// `‖y − A x‖² + λ Σ log(δ + |xᵢ|)`.
pub fn objective_f(x: &Vector, a: &DenseMatrix, y: &Vector, lambda: f64, delta: f64) -> f64 {
    (y - a * x).norm_squared() + lambda * log_penalty(x, delta)
}

/// Majorizing surrogate of [`objective_f`]:
/// `f(x) + ‖x − z‖² − ‖A(x − z)‖²`.
pub fn surrogate_q(
    x: &Vector,
    z: &Vector,
    a: &DenseMatrix,
    y: &Vector,
    lambda: f64,
    delta: f64,
) -> f64 {
    let d = x - z;
    objective_f(x, a, y, lambda, delta) + d.norm_squared() - (a * &d).norm_squared()
}

/// Penalty whose surrogate minimization reproduces `rule`: `λΣlog(δ+|x|)`
/// for log, `2t‖x‖₁` for soft and `t²‖x‖₀` for hard thresholding.
pub fn rule_penalty(x: &Vector, rule: &ThresholdRule) -> f64 {
    match rule.kind() {
        ThresholdKind::Log => rule.lambda() * log_penalty(x, rule.delta()),
        ThresholdKind::Soft => 2.0 * rule.lambda() * x.lp_norm(1),
        ThresholdKind::Hard => rule.lambda() * rule.lambda() * nnz(x) as f64,
    }
}

/// Runs IST, IHT or ILT (by `kind`) on a problem whose sensing matrix is
/// already a contraction.
pub fn solve(
    problem: &MeasurementProblem,
    kind: ThresholdKind,
    schedule: LambdaSchedule,
    config: &SolverConfig,
) -> Result<SolveResult> {
    solve_with_snapshots(problem, kind, schedule, config, false)
}

/// [`solve`], additionally keeping every iterate in the trace when
/// `snapshots` is set.
pub fn solve_with_snapshots(
    problem: &MeasurementProblem,
    kind: ThresholdKind,
    schedule: LambdaSchedule,
    config: &SolverConfig,
    snapshots: bool,
) -> Result<SolveResult> {
    solve_with_operator(problem, kind, schedule, config, snapshots, &|rule, z| rule.apply_scalar(z))
}

/// The shared loop with the scalar operator supplied by the caller; the
/// self-check suites use it to run against deliberately broken operators.
pub(crate) fn solve_with_operator(
    problem: &MeasurementProblem,
    kind: ThresholdKind,
    schedule: LambdaSchedule,
    config: &SolverConfig,
    snapshots: bool,
    operator: &(dyn Fn(&ThresholdRule, f64) -> f64 + Sync),
) -> Result<SolveResult> {
    config.validate()?;
    let a = &problem.a;
    let y = &problem.y;
    let norm = spectral_norm(a)?;
    if norm >= 1.0 {
        return Err(Error::ContractionViolation { norm });
    }

    let fixed_rule = match schedule {
        LambdaSchedule::Fixed { lambda, delta } => Some(ThresholdRule::new(kind, lambda, delta)?),
        LambdaSchedule::TopK { k, delta, .. } => {
            if k == 0 {
                return Err(Error::invalid("k", "top-K schedule needs k ≥ 1"));
            }
            if kind == ThresholdKind::Log && !(delta > 0.0 && delta.is_finite()) {
                return Err(Error::invalid("delta", "log rule needs delta > 0"));
            }
            None
        }
    };

    let n = a.ncols();
    let mut x = Vector::zeros(n);
    let mut ax = Vector::zeros(a.nrows());
    let mut trace = IterateTrace::default();
    let mut converged = false;
    let mut iterations_run = 0;
    let mut rule = fixed_rule.unwrap_or(ThresholdRule::hard(0.0)?);

    for iteration in 0..config.max_iters {
        let z = &x + a.tr_mul(&(y - &ax));
        if let LambdaSchedule::TopK { k, delta, log_lambda } = schedule {
            rule = params_for_topk_with(&z, k, kind, delta, log_lambda)?;
        }
        let x_next = z.map(|v| operator(&rule, v));
        if !x_next.iter().all(|v| v.is_finite()) {
            return Err(Error::NumericalFailure {
                iteration,
                reason: "non-finite iterate".into(),
            });
        }
        let ax_next = a * &x_next;
        let diff = &x_next - &x;
        let step_delta = sup_norm(&diff);

        if config.record_trace {
            let residual_sq = (y - &ax_next).norm_squared();
            let objective = residual_sq + rule_penalty(&x_next, &rule);
            let step_sq = diff.norm_squared();
            let a_step_sq = (&ax_next - &ax).norm_squared();
            trace.records.push(IterateRecord {
                objective_f: objective,
                surrogate: objective + step_sq - a_step_sq,
                residual_sq,
                nnz: nnz(&x_next),
                step_delta,
                step_sq,
                lambda: rule.lambda(),
            });
            if snapshots {
                trace.snapshots.push(x_next.clone());
            }
        }

        x = x_next;
        ax = ax_next;
        iterations_run = iteration + 1;
        if step_delta <= config.step_tol {
            converged = true;
            break;
        }
    }

    let tol = fixed_point_tolerance(config.step_tol);
    let fixed_point = check_fixed_point_for_rule(&x, a, y, &rule, tol)?;
    Ok(SolveResult {
        x_hat: x,
        iterations_run,
        converged,
        trace,
        final_rule: rule,
        fixed_point,
    })
}

/// Report tolerance used for a run stopped at `step_tol`.
pub fn fixed_point_tolerance(step_tol: f64) -> f64 {
    (10.0 * step_tol).max(1e-6)
}

/// Stationarity check for the log iteration at `x_bar`: on the support
/// `sᵢ = λ·sign(x̄ᵢ)/(2(|x̄ᵢ| + δ))`, off the support `|sᵢ| ≤ x₀`.
pub fn check_fixed_point(
    x_bar: &Vector,
    a: &DenseMatrix,
    y: &Vector,
    lambda: f64,
    delta: f64,
    tol: f64,
) -> Result<FixedPointReport> {
    let rule = ThresholdRule::log(lambda, delta)?;
    check_fixed_point_for_rule(x_bar, a, y, &rule, tol)
}

/// Fixed-point conditions for any rule. Soft rules require `sᵢ = t·sign(x̄ᵢ)`
/// on the support and hard rules `sᵢ = 0`; off the support every rule
/// requires `|sᵢ|` to lie in its zero region.
pub fn check_fixed_point_for_rule(
    x_bar: &Vector,
    a: &DenseMatrix,
    y: &Vector,
    rule: &ThresholdRule,
    tol: f64,
) -> Result<FixedPointReport> {
    check_dims(a, x_bar, y)?;
    let s = a.tr_mul(&(y - a * x_bar));
    let bound = rule.zero_region();
    let mut support = Vec::new();
    let mut off_support = Vec::new();
    let mut max_support_violation = 0.0_f64;
    let mut max_offsupport_excess = 0.0_f64;
    for (i, (&xi, &si)) in x_bar.iter().zip(s.iter()).enumerate() {
        if xi != 0.0 {
            let target = match rule.kind() {
                ThresholdKind::Log => rule.lambda() * xi.signum() / (2.0 * (xi.abs() + rule.delta())),
                ThresholdKind::Soft => rule.lambda() * xi.signum(),
                ThresholdKind::Hard => 0.0,
            };
            max_support_violation = max_support_violation.max((si - target).abs());
            support.push(i);
        } else {
            max_offsupport_excess = max_offsupport_excess.max(si.abs() - bound);
            off_support.push(i);
        }
    }
    let passes = max_support_violation <= tol && max_offsupport_excess <= tol;
    Ok(FixedPointReport {
        s,
        support,
        off_support,
        max_support_violation,
        max_offsupport_excess,
        tol,
        passes,
    })
}

/// Checks whether the columns of `a` indexed by `support` have all singular
/// values above ½ and `‖a‖₂ < 1`, the sufficient condition for a fixed point
/// with that support to be a local minimum.
pub fn check_local_min_condition(a: &DenseMatrix, support: &[usize]) -> Result<LocalMinReport> {
    if let Some(&bad) = support.iter().find(|&&j| j >= a.ncols()) {
        return Err(Error::invalid("support", format!("column {bad} out of range")));
    }
    let norm = spectral_norm(a)?;
    if support.is_empty() {
        return Ok(LocalMinReport {
            min_singular: None,
            spectral_norm: norm,
            passes: norm < 1.0,
        });
    }
    let sub = a.select_columns(support);
    let min_singular = if support.len() > a.nrows() {
        0.0
    } else {
        sub.svd(false, false).singular_values.min()
    };
    Ok(LocalMinReport {
        min_singular: Some(min_singular),
        spectral_norm: norm,
        passes: min_singular > 0.5 && norm < 1.0,
    })
}

/// Evaluates `λ/δ + 2δ > 2√(2λ)`.
pub fn check_delta_condition(lambda: f64, delta: f64) -> DeltaConditionReport {
    let lhs = lambda / delta + 2.0 * delta;
    let rhs = 2.0 * (2.0 * lambda).sqrt();
    DeltaConditionReport {
        lambda,
        delta,
        lhs,
        rhs,
        satisfied: lhs > rhs,
    }
}
