//! Problem records shared by the sparse solvers and the experiment drivers.

use crate::error::{Error, Result};
use crate::linalg::{
    ensure_finite_matrix, ensure_finite_vector, rescale_to_contraction, DenseMatrix, Vector,
};

/// A sparse recovery instance `y = A x + n`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementProblem {
    pub a: DenseMatrix,
    pub y: Vector,
    pub x_true: Option<Vector>,
    pub noise_sigma: f64,
    pub seed: u64,
    /// Factor by which `a` and `y` were divided; 1 when never rescaled.
    pub scale_applied: f64,
}

impl MeasurementProblem {
    pub fn new(a: DenseMatrix, y: Vector) -> Result<Self> {
        if y.len() != a.nrows() {
            return Err(Error::DimensionMismatch {
                what: "y length vs A rows",
                expected: a.nrows(),
                actual: y.len(),
            });
        }
        ensure_finite_matrix(&a, "A")?;
        ensure_finite_vector(&y, "y")?;
        Ok(Self {
            a,
            y,
            x_true: None,
            noise_sigma: 0.0,
            seed: 0,
            scale_applied: 1.0,
        })
    }

    pub fn with_ground_truth(mut self, x_true: Vector) -> Result<Self> {
        if x_true.len() != self.a.ncols() {
            return Err(Error::DimensionMismatch {
                what: "x_true length vs A cols",
                expected: self.a.ncols(),
                actual: x_true.len(),
            });
        }
        ensure_finite_vector(&x_true, "x_true")?;
        self.x_true = Some(x_true);
        Ok(self)
    }

    pub fn with_provenance(mut self, noise_sigma: f64, seed: u64) -> Self {
        self.noise_sigma = noise_sigma;
        self.seed = seed;
        self
    }

    /// Rescales `a` and `y` together so that `‖a‖₂ ≤ rho`. The ground truth
    /// is untouched since `y/c = (A/c) x` has the same solutions.
    pub fn rescaled(mut self, rho: f64) -> Result<Self> {
        let (a, y, c) = rescale_to_contraction(&self.a, &self.y, rho)?;
        self.a = a;
        self.y = y;
        self.scale_applied *= c;
        Ok(self)
    }

    pub fn rows(&self) -> usize {
        self.a.nrows()
    }

    pub fn cols(&self) -> usize {
        self.a.ncols()
    }
}

/// Iteration controls shared by every solver loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub max_iters: usize,
    /// Stop once `‖x⁺ − x‖∞` drops to this value.
    pub step_tol: f64,
    /// Target spectral norm used when rescaling.
    pub rho: f64,
    pub record_trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iters: 250,
            step_tol: 1e-8,
            rho: 0.99,
            record_trace: true,
        }
    }
}

impl SolverConfig {
    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn with_step_tol(mut self, step_tol: f64) -> Self {
        self.step_tol = step_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters", "must be at least 1"));
        }
        if !(self.step_tol >= 0.0) {
            return Err(Error::invalid("step_tol", "must be nonnegative"));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::invalid("rho", "must lie in (0, 1)"));
        }
        Ok(())
    }
}
