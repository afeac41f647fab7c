use std::fmt;

use crate::linalg::Vector;
use crate::thresholding::ThresholdKind;

/// Default relative ℓ2 tolerance for exact recovery.
pub const DEFAULT_REL_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Experiment {
    Phase,
    Path,
    Completion,
}

impl Experiment {
    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::Phase => "phase",
            Experiment::Path => "path",
            Experiment::Completion => "completion",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ValueKind {
    AvgError,
    RecoveryProb,
    AvgResidualSq,
    AvgFrobError,
}

impl ValueKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ValueKind::AvgError => "avg_error",
            ValueKind::RecoveryProb => "recovery_prob",
            ValueKind::AvgResidualSq => "avg_residual_sq",
            ValueKind::AvgFrobError => "avg_frob_error",
        }
    }
}

impl fmt::Display for ValueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One aggregate over an ensemble of trials.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub experiment: Experiment,
    pub algorithm: ThresholdKind,
    /// Sparsity level or iteration index, depending on the experiment.
    pub sweep_coord: usize,
    pub trials: usize,
    pub value_kind: ValueKind,
    pub value: f64,
}

impl MetricsRow {
    /// `IST`/`IHT`/`ILT` for sparse recovery, `soft-SVT` etc. for completion.
    pub fn algorithm_label(&self) -> String {
        match self.experiment {
            Experiment::Completion => format!("{}-SVT", self.algorithm.as_str()),
            _ => self.algorithm.algorithm_name().to_string(),
        }
    }
}

/// Same support as `x_star` and `‖x̂ − x*‖₂ ≤ rel_tol · ‖x*‖₂`. A zero
/// `x_star` is recovered only by an exactly zero estimate.
pub fn exact_recovery(x_hat: &Vector, x_star: &Vector, rel_tol: f64) -> bool {
    assert_eq!(x_hat.len(), x_star.len(), "exact_recovery needs equal lengths");
    let same_support = x_hat.iter().zip(x_star.iter()).all(|(a, b)| (*a != 0.0) == (*b != 0.0));
    if !same_support {
        return false;
    }
    let scale = x_star.norm();
    if scale == 0.0 {
        return x_hat.iter().all(|v| *v == 0.0);
    }
    (x_hat - x_star).norm() <= rel_tol * scale
}
