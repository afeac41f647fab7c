//! Sparse recovery and low-rank matrix completion by iterative thresholding.
//!
//! The crate implements iterative soft (IST), hard (IHT) and log (ILT)
//! thresholding for `y = A x + n`, singular-value thresholding for matrix
//! completion, the convergence diagnostics for the log iteration, and
//! seeded experiment runners that produce reproducible metric tables.

pub mod error;
pub mod experiments;
pub mod linalg;
pub mod lowrank;
pub mod problem;
pub mod selfcheck;
pub mod solver;
pub mod thresholding;

pub use error::{Error, Result};
pub use linalg::{rescale_to_contraction, spectral_norm, spectral_norm_estimate, DenseMatrix, Vector};
pub use lowrank::{CompletionProblem, CompletionTrace};
pub use problem::{MeasurementProblem, SolverConfig};
pub use solver::{LambdaSchedule, SolveResult};
pub use thresholding::{ThresholdKind, ThresholdRule};
