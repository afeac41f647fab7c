//! Singular-value thresholding and top-K matrix completion.
//!
//! Completion alternates two steps starting from the observed entries
//! (zeros elsewhere): overwrite the observed entries with the data, then keep
//! only the `K` largest singular values, shrinking them with the chosen
//! thresholding rule.

use std::collections::HashSet;

use nalgebra::SVD;

use crate::error::{Error, Result};
use crate::linalg::{ensure_finite_matrix, DenseMatrix, Vector};
use crate::problem::SolverConfig;
use crate::thresholding::{params_for_topk, ThresholdKind, ThresholdRule};

/// Singular values at or below this fraction of the largest count as zero.
pub const RANK_TOL: f64 = 1e-9;

/// Observed entries of a matrix believed to have rank at most `rank_target`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompletionProblem {
    pub n_rows: usize,
    pub n_cols: usize,
    omega: Vec<(usize, usize)>,
    observed: Vec<f64>,
    pub rank_target: usize,
    pub x_true: Option<DenseMatrix>,
    pub seed: u64,
}

impl CompletionProblem {
    pub fn new(
        n_rows: usize,
        n_cols: usize,
        omega: Vec<(usize, usize)>,
        observed: Vec<f64>,
        rank_target: usize,
    ) -> Result<Self> {
        if omega.len() != observed.len() {
            return Err(Error::DimensionMismatch {
                what: "observed values vs omega",
                expected: omega.len(),
                actual: observed.len(),
            });
        }
        if rank_target == 0 {
            return Err(Error::invalid("rank_target", "must be at least 1"));
        }
        let mut seen = HashSet::with_capacity(omega.len());
        for &(r, c) in &omega {
            if r >= n_rows || c >= n_cols {
                return Err(Error::invalid("omega", format!("entry ({r}, {c}) out of bounds")));
            }
            if !seen.insert((r, c)) {
                return Err(Error::invalid("omega", format!("duplicate entry ({r}, {c})")));
            }
        }
        if !observed.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("observed"));
        }
        Ok(Self {
            n_rows,
            n_cols,
            omega,
            observed,
            rank_target,
            x_true: None,
            seed: 0,
        })
    }

    /// Observes `x_true` on `omega` and keeps it as ground truth.
    pub fn from_ground_truth(x_true: DenseMatrix, omega: Vec<(usize, usize)>, rank_target: usize) -> Result<Self> {
        ensure_finite_matrix(&x_true, "x_true")?;
        let (n_rows, n_cols) = x_true.shape();
        let observed = omega
            .iter()
            .map(|&(r, c)| x_true.get((r, c)).copied().unwrap_or(f64::NAN))
            .collect();
        let mut problem = Self::new(n_rows, n_cols, omega, observed, rank_target)?;
        problem.x_true = Some(x_true);
        Ok(problem)
    }

    pub fn omega(&self) -> &[(usize, usize)] {
        &self.omega
    }

    pub fn observed(&self) -> &[f64] {
        &self.observed
    }

    /// Observed values in place, zeros elsewhere.
    pub fn observed_matrix(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.n_rows, self.n_cols);
        for (&(r, c), &v) in self.omega.iter().zip(&self.observed) {
            m[(r, c)] = v;
        }
        m
    }

    /// `‖P_Ω(X − Y)‖_F`.
    pub fn observed_residual(&self, x: &DenseMatrix) -> f64 {
        self.omega
            .iter()
            .zip(&self.observed)
            .map(|(&(r, c), &v)| (x[(r, c)] - v).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompletionRecord {
    /// `‖X − X*‖_F` when the ground truth is known.
    pub frob_error: Option<f64>,
    pub observed_residual: f64,
    pub rank: usize,
}

/// Per-iteration history of a completion run. Entry 0 describes the
/// starting point; entry `n` the iterate after `n` updates.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CompletionTrace {
    pub records: Vec<CompletionRecord>,
}

// nalgebra's own default. At f64::EPSILON the bidiagonal sweep can stop
// on a rank-deficient input with a wrong factorization and no error.
const SVD_EPS: f64 = 5.0 * f64::EPSILON;

fn decompose(x: &DenseMatrix) -> Result<SVD<f64, nalgebra::Dyn, nalgebra::Dyn>> {
    ensure_finite_matrix(x, "X")?;
    x.clone()
        .try_svd(true, true, SVD_EPS, 0)
        .ok_or_else(|| Error::NumericalFailure {
            iteration: 0,
            reason: "SVD did not converge".into(),
        })
}

/// Sum of singular values.
pub fn nuclear_norm(x: &DenseMatrix) -> Result<f64> {
    if x.is_empty() {
        return Ok(0.0);
    }
    Ok(decompose(x)?.singular_values.sum())
}

/// Number of singular values above `RANK_TOL` times the largest.
pub fn numerical_rank_of_spectrum(spectrum: &Vector) -> usize {
    let top = spectrum.iter().fold(0.0_f64, |m, v| m.max(*v));
    if top == 0.0 {
        return 0;
    }
    spectrum.iter().filter(|&&s| s > RANK_TOL * top).count()
}

pub fn numerical_rank(x: &DenseMatrix) -> Result<usize> {
    if x.is_empty() {
        return Ok(0);
    }
    Ok(numerical_rank_of_spectrum(&decompose(x)?.singular_values))
}

/// Applies `rule` to the singular values of `x` and reconstructs.
pub fn sv_threshold(x: &DenseMatrix, rule: &ThresholdRule) -> Result<DenseMatrix> {
    Ok(sv_threshold_with_spectrum(x, |_| Ok(*rule))?.0)
}

/// Keeps the `k` largest singular values of `x`, thresholded by `kind`.
pub fn sv_threshold_topk(x: &DenseMatrix, k: usize, kind: ThresholdKind, delta: f64) -> Result<DenseMatrix> {
    Ok(sv_threshold_topk_with_spectrum(x, k, kind, delta)?.0)
}

/// [`sv_threshold_topk`] that also returns the thresholded spectrum.
pub fn sv_threshold_topk_with_spectrum(
    x: &DenseMatrix,
    k: usize,
    kind: ThresholdKind,
    delta: f64,
) -> Result<(DenseMatrix, Vector)> {
    if k == 0 {
        return Err(Error::invalid("k", "must be at least 1"));
    }
    sv_threshold_with_spectrum(x, |sigma| params_for_topk(sigma, k, kind, delta))
}

fn sv_threshold_with_spectrum(
    x: &DenseMatrix,
    rule_for: impl FnOnce(&Vector) -> Result<ThresholdRule>,
) -> Result<(DenseMatrix, Vector)> {
    if x.is_empty() {
        return Ok((x.clone(), Vector::zeros(0)));
    }
    let svd = decompose(x)?;
    let rule = rule_for(&svd.singular_values)?;
    let shrunk = svd.singular_values.map(|s| rule.apply_scalar(s));
    let (Some(u), Some(v_t)) = (svd.u.as_ref(), svd.v_t.as_ref()) else {
        unreachable!("SVD computed with both factors");
    };
    let mut out = DenseMatrix::zeros(x.nrows(), x.ncols());
    for (i, &s) in shrunk.iter().enumerate() {
        if s != 0.0 {
            out.ger(s, &u.column(i), &v_t.row(i).transpose(), 1.0);
        }
    }
    Ok((out, shrunk))
}

/// Unit gradient step on the observed entries: overwrites them with the data
/// and leaves every other entry alone.
pub fn completion_step(x: &DenseMatrix, problem: &CompletionProblem) -> Result<DenseMatrix> {
    if x.shape() != (problem.n_rows, problem.n_cols) {
        return Err(Error::DimensionMismatch {
            what: "iterate rows vs problem rows",
            expected: problem.n_rows,
            actual: x.nrows(),
        });
    }
    let mut next = x.clone();
    for (&(r, c), &v) in problem.omega.iter().zip(&problem.observed) {
        next[(r, c)] = v;
    }
    Ok(next)
}

/// Top-K singular-value thresholding completion.
///
/// Runs at most `config.max_iters` updates from `P_Ω(Y)`, stopping early once
/// the observed residual is at most `config.step_tol`.
pub fn complete(
    problem: &CompletionProblem,
    kind: ThresholdKind,
    delta: f64,
    config: &SolverConfig,
) -> Result<(DenseMatrix, CompletionTrace)> {
    config.validate()?;
    let mut x = problem.observed_matrix();
    let mut trace = CompletionTrace::default();
    let record = |x: &DenseMatrix, rank: usize| CompletionRecord {
        frob_error: problem.x_true.as_ref().map(|t| (x - t).norm()),
        observed_residual: problem.observed_residual(x),
        rank,
    };
    trace.records.push(record(&x, numerical_rank(&x)?));

    for iteration in 1..=config.max_iters {
        let stepped = completion_step(&x, problem)?;
        let (next, spectrum) = sv_threshold_topk_with_spectrum(&stepped, problem.rank_target, kind, delta)
            .map_err(|e| match e {
                Error::NumericalFailure { reason, .. } | Error::InvalidParameter { reason, .. } => {
                    Error::NumericalFailure { iteration, reason }
                }
                Error::NonFinite(_) => Error::NumericalFailure {
                    iteration,
                    reason: "non-finite iterate".into(),
                },
                other => other,
            })?;
        x = next;
        let rec = record(&x, numerical_rank_of_spectrum(&spectrum));
        let done = rec.observed_residual <= config.step_tol;
        trace.records.push(rec);
        if done {
            break;
        }
    }
    Ok((x, trace))
}
