use rayon::prelude::*;

use super::generate::{derive_seed, gen_completion_problem, gen_sparse_problem};
use super::metrics::{exact_recovery, Experiment, MetricsRow, ValueKind, DEFAULT_REL_TOL};
use crate::error::{Error, Result};
use crate::lowrank::complete;
use crate::problem::SolverConfig;
use crate::solver::{solve, LambdaSchedule};
use crate::thresholding::ThresholdKind;

/// Default log-rule offset for the experiments.
pub const DEFAULT_DELTA: f64 = 1e-3;

/// Parameters shared by the sparse-recovery ensembles.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSpec {
    pub m: usize,
    pub n: usize,
    pub k_grid: Vec<usize>,
    pub trials: usize,
    pub noise_sigma: f64,
    pub max_iters: usize,
    pub master_seed: u64,
    pub algorithms: Vec<ThresholdKind>,
    pub delta: f64,
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        Self {
            m: 100,
            n: 200,
            k_grid: (10..=60).step_by(10).collect(),
            trials: 100,
            noise_sigma: 0.0,
            max_iters: 250,
            master_seed: 12345,
            algorithms: ThresholdKind::ALL.to_vec(),
            delta: DEFAULT_DELTA,
        }
    }
}

impl EnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            return Err(Error::invalid("M", "dimensions must be positive"));
        }
        if self.trials == 0 {
            return Err(Error::invalid("trials", "must be at least 1"));
        }
        if self.max_iters == 0 {
            return Err(Error::invalid("iters", "must be at least 1"));
        }
        if let Some(&k) = self.k_grid.iter().find(|&&k| k >= self.n) {
            return Err(Error::invalid("K", format!("sparsity {k} must be below N = {}", self.n)));
        }
        if self.algorithms.is_empty() {
            return Err(Error::invalid("algorithms", "at least one algorithm is required"));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::invalid("delta", "must be positive"));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::invalid("noise", "must be finite and nonnegative"));
        }
        Ok(())
    }

    fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            max_iters: self.max_iters,
            record_trace: false,
            ..SolverConfig::default()
        }
    }
}

// Sums in trial order so the result does not depend on scheduling.
fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    sum / count as f64
}

/// Recovery sweep over `spec.k_grid` with the top-K schedule. Emits
/// `avg_error` and `recovery_prob` for every `(K, algorithm)` pair.
pub fn run_noiseless_sweep(spec: &EnsembleSpec) -> Result<Vec<MetricsRow>> {
    spec.validate()?;
    if spec.noise_sigma != 0.0 {
        return Err(Error::invalid("noise", "the recovery sweep is noiseless"));
    }
    let config = spec.solver_config();
    let mut rows = Vec::with_capacity(spec.k_grid.len() * spec.algorithms.len() * 2);
    for &k in &spec.k_grid {
        // per trial, per algorithm: (error norm, recovered)
        let outcomes: Vec<Vec<(f64, bool)>> = (0..spec.trials)
            .into_par_iter()
            .map(|t| {
                let seed = derive_seed(spec.master_seed, k as u64, t as u64);
                let problem = gen_sparse_problem(spec.m, spec.n, k, 0.0, seed)?;
                let x_star = problem.x_true.as_ref().expect("generated problems carry ground truth");
                spec.algorithms
                    .iter()
                    .map(|&kind| {
                        let schedule = LambdaSchedule::top_k(k.max(1), spec.delta);
                        let result = solve(&problem, kind, schedule, &config)?;
                        let err = (&result.x_hat - x_star).norm();
                        Ok((err, exact_recovery(&result.x_hat, x_star, DEFAULT_REL_TOL)))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;

        for (a, &kind) in spec.algorithms.iter().enumerate() {
            let row = |value_kind, value| MetricsRow {
                experiment: Experiment::Phase,
                algorithm: kind,
                sweep_coord: k,
                trials: spec.trials,
                value_kind,
                value,
            };
            rows.push(row(ValueKind::AvgError, mean(outcomes.iter().map(|o| o[a].0))));
            rows.push(row(
                ValueKind::RecoveryProb,
                mean(outcomes.iter().map(|o| if o[a].1 { 1.0 } else { 0.0 })),
            ));
        }
    }
    Ok(rows)
}

/// Residual-vs-sparsity path on noisy `k_true`-sparse instances. Each trial
/// instance is solved at every enforced sparsity in `k_grid`; emits
/// `avg_residual_sq` per `(k, algorithm)`.
pub fn run_noisy_path(spec: &EnsembleSpec, k_true: usize, k_grid: &[usize]) -> Result<Vec<MetricsRow>> {
    spec.validate()?;
    if !(spec.noise_sigma > 0.0) {
        return Err(Error::invalid("noise", "the noisy path needs noise > 0"));
    }
    if k_true > spec.n {
        return Err(Error::invalid("K-true", format!("must be at most N = {}", spec.n)));
    }
    if let Some(&k) = k_grid.iter().find(|&&k| k >= spec.n) {
        return Err(Error::invalid("k-grid", format!("sparsity {k} must be below N = {}", spec.n)));
    }
    let config = spec.solver_config();
    // per trial: residuals indexed [k][algorithm]
    let residuals: Vec<Vec<Vec<f64>>> = (0..spec.trials)
        .into_par_iter()
        .map(|t| {
            let seed = derive_seed(spec.master_seed, k_true as u64, t as u64);
            let problem = gen_sparse_problem(spec.m, spec.n, k_true, spec.noise_sigma, seed)?;
            k_grid
                .iter()
                .map(|&k| {
                    spec.algorithms
                        .iter()
                        .map(|&kind| {
                            if k == 0 {
                                return Ok(problem.y.norm_squared());
                            }
                            let result = solve(&problem, kind, LambdaSchedule::top_k(k, spec.delta), &config)?;
                            Ok((&problem.y - &problem.a * &result.x_hat).norm_squared())
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(k_grid.len() * spec.algorithms.len());
    for (ki, &k) in k_grid.iter().enumerate() {
        for (a, &kind) in spec.algorithms.iter().enumerate() {
            rows.push(MetricsRow {
                experiment: Experiment::Path,
                algorithm: kind,
                sweep_coord: k,
                trials: spec.trials,
                value_kind: ValueKind::AvgResidualSq,
                value: mean(residuals.iter().map(|r| r[ki][a])),
            });
        }
    }
    Ok(rows)
}

/// Per-trial Frobenius error curves of the completion race.
#[derive(Debug, Clone, PartialEq)]
pub struct CompletionCurves {
    pub kinds: Vec<ThresholdKind>,
    /// `curves[trial][kind][iteration]`, `iters` entries each.
    pub curves: Vec<Vec<Vec<f64>>>,
    /// `‖X*‖_F` per trial.
    pub truth_norms: Vec<f64>,
}

impl CompletionCurves {
    /// First iteration at which trial `t` under kind index `a` has error at
    /// most `rel · ‖X*‖_F`; `None` if it never gets there.
    pub fn first_hit(&self, t: usize, a: usize, rel: f64) -> Option<usize> {
        let target = rel * self.truth_norms[t];
        self.curves[t][a].iter().position(|&e| e <= target)
    }

    pub fn mean_curve(&self, a: usize) -> Vec<f64> {
        let iters = self.curves.first().map_or(0, |c| c[a].len());
        (0..iters).map(|i| mean(self.curves.iter().map(|c| c[a][i]))).collect()
    }
}

/// Runs soft, hard and log top-K completion on `trials` random instances.
/// Each curve has `iters` points: the starting error followed by the error
/// after each of `iters − 1` updates.
pub fn run_completion_trials(
    n: usize,
    rank: usize,
    obs_frac: f64,
    trials: usize,
    iters: usize,
    master_seed: u64,
    delta: f64,
) -> Result<CompletionCurves> {
    if trials == 0 {
        return Err(Error::invalid("trials", "must be at least 1"));
    }
    if iters == 0 {
        return Err(Error::invalid("iters", "must be at least 1"));
    }
    let kinds = ThresholdKind::ALL.to_vec();
    let config = SolverConfig {
        max_iters: iters.saturating_sub(1).max(1),
        step_tol: 0.0,
        record_trace: true,
        ..SolverConfig::default()
    };
    let per_trial: Vec<(Vec<Vec<f64>>, f64)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let seed = derive_seed(master_seed, rank as u64, t as u64);
            let problem = gen_completion_problem(n, rank, obs_frac, seed)?;
            let truth = problem.x_true.as_ref().expect("generated problems carry ground truth").norm();
            let curves = kinds
                .iter()
                .map(|&kind| {
                    let (_, trace) = complete(&problem, kind, delta, &config)?;
                    let mut curve: Vec<f64> = trace
                        .records
                        .iter()
                        .map(|r| r.frob_error.expect("ground truth present"))
                        .take(iters)
                        .collect();
                    // exact convergence stops early; hold the final value
                    let last = *curve.last().expect("trace holds the starting point");
                    curve.resize(iters, last);
                    Ok(curve)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((curves, truth))
        })
        .collect::<Result<_>>()?;
    let (curves, truth_norms) = per_trial.into_iter().unzip();
    Ok(CompletionCurves {
        kinds,
        curves,
        truth_norms,
    })
}

/// Mean Frobenius error per iteration for each thresholding kind:
/// `3 × iters` rows.
pub fn run_completion_bench(
    n: usize,
    rank: usize,
    obs_frac: f64,
    trials: usize,
    iters: usize,
    master_seed: u64,
    delta: f64,
) -> Result<Vec<MetricsRow>> {
    let ensemble = run_completion_trials(n, rank, obs_frac, trials, iters, master_seed, delta)?;
    let mut rows = Vec::with_capacity(ensemble.kinds.len() * iters);
    for (a, &kind) in ensemble.kinds.iter().enumerate() {
        for (i, value) in ensemble.mean_curve(a).into_iter().enumerate() {
            rows.push(MetricsRow {
                experiment: Experiment::Completion,
                algorithm: kind,
                sweep_coord: i,
                trials,
                value_kind: ValueKind::AvgFrobError,
                value,
            });
        }
    }
    Ok(rows)
}
