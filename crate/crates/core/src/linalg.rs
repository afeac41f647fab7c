//! Dense vector and matrix helpers shared by the solvers.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Dense real vector.
pub type Vector = DVector<f64>;
/// Dense real matrix (column-major storage, indexed as `(row, col)`).
pub type DenseMatrix = DMatrix<f64>;

/// Maximum number of power iterations used by [`spectral_norm`].
pub const POWER_MAX_ITERS: usize = 1000;
/// Relative residual tolerance used by [`spectral_norm`].
pub const POWER_TOL: f64 = 1e-9;

// Relative slack below which `rescale_to_contraction` treats the norm as
// already at the target; keeps rescaling idempotent under rounding.
const RESCALE_SLACK: f64 = 1e-12;

pub(crate) fn ensure_finite_matrix(a: &DenseMatrix, what: &'static str) -> Result<()> {
    if a.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

pub(crate) fn ensure_finite_vector(v: &Vector, what: &'static str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

/// Largest singular value of `a` by power iteration on `AᵀA`.
///
/// Starts from the normalized all-ones vector so results are reproducible,
/// and stops once the eigen-residual `‖AᵀAv − μv‖` falls below `tol · μ`
/// or after `iters` products. If the all-ones start lies in the null space
/// of `a`, a second fixed start vector is used.
pub fn spectral_norm_estimate(a: &DenseMatrix, iters: usize, tol: f64) -> Result<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Err(Error::invalid("A", "matrix must be nonempty"));
    }
    if iters == 0 {
        return Err(Error::invalid("iters", "at least one iteration is required"));
    }
    ensure_finite_matrix(a, "A")?;

    let n = a.ncols();
    let ones = Vector::from_element(n, 1.0);
    match power_iterate(a, ones, iters, tol) {
        Some(mu) => Ok(mu.sqrt()),
        None => {
            let alt = Vector::from_fn(n, |i, _| 1.0 + (i as f64 + 1.0).sin());
            Ok(power_iterate(a, alt, iters, tol).unwrap_or(0.0).sqrt())
        }
    }
}

/// [`spectral_norm_estimate`] with the default iteration budget.
pub fn spectral_norm(a: &DenseMatrix) -> Result<f64> {
    spectral_norm_estimate(a, POWER_MAX_ITERS, POWER_TOL)
}

// Returns the Rayleigh quotient of AᵀA, or None when the iterate collapses.
fn power_iterate(a: &DenseMatrix, start: Vector, iters: usize, tol: f64) -> Option<f64> {
    let mut v = start.normalize();
    let mut mu = 0.0;
    for _ in 0..iters {
        let w = a.tr_mul(&(a * &v));
        let norm_w = w.norm();
        if norm_w == 0.0 {
            return None;
        }
        mu = v.dot(&w);
        let residual = (&w - &v * mu).norm();
        if residual <= tol * mu {
            break;
        }
        v = w / norm_w;
    }
    Some(mu.max(0.0))
}

/// Divides `a` and `y` by a common factor so that `‖a‖₂ ≤ rho`.
///
/// Returns the scaled pair and the factor `c ≥ 1` that was applied. Inputs
/// already at or below `rho` come back unchanged with `c = 1`.
pub fn rescale_to_contraction(
    a: &DenseMatrix,
    y: &Vector,
    rho: f64,
) -> Result<(DenseMatrix, Vector, f64)> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::invalid("rho", format!("must lie in (0, 1), got {rho}")));
    }
    ensure_finite_vector(y, "y")?;
    let sigma = spectral_norm(a)?;
    if sigma > rho * (1.0 + RESCALE_SLACK) {
        let c = sigma / rho;
        Ok((a / c, y / c, c))
    } else {
        Ok((a.clone(), y.clone(), 1.0))
    }
}

/// Number of entries with magnitude above zero.
pub fn nnz(x: &Vector) -> usize {
    x.iter().filter(|v| **v != 0.0).count()
}

/// Largest absolute entry of `x`, zero for an empty vector.
pub fn sup_norm(x: &Vector) -> f64 {
    x.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}
