//! Seeded random instances and ensemble runners for the three benchmark
//! experiments: noiseless recovery vs sparsity, the noisy residual path, and
//! the matrix-completion race.
//!
//! Every trial draws its instance from a seed derived from
//! `(master_seed, sweep coordinate, trial index)`, trials may run on any
//! number of threads, and aggregation always walks trials in index order,
//! so the emitted rows are bit-identical regardless of scheduling.

mod generate;
mod metrics;
mod runners;

pub use generate::{derive_seed, gen_completion_problem, gen_sparse_problem};
pub use metrics::{exact_recovery, Experiment, MetricsRow, ValueKind, DEFAULT_REL_TOL};
pub use runners::{
    run_completion_bench, run_completion_trials, run_noiseless_sweep, run_noisy_path, CompletionCurves,
    EnsembleSpec, DEFAULT_DELTA,
};
