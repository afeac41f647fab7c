#![allow(dead_code)]

use logshrink::DenseMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Singular values by one-sided Jacobi rotations, sorted descending.
/// Written from scratch so it shares no code with the library's SVD.
pub fn jacobi_singular_values(a: &DenseMatrix) -> Vec<f64> {
    let mut w = if a.nrows() >= a.ncols() { a.clone() } else { a.transpose() };
    let n = w.ncols();
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = w.column(p).iter().map(|v| v * v).sum();
                let beta: f64 = w.column(q).iter().map(|v| v * v).sum();
                let gamma: f64 = w.column(p).iter().zip(w.column(q).iter()).map(|(x, y)| x * y).sum();
                if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..w.nrows() {
                    let (x, y) = (w[(i, p)], w[(i, q)]);
                    w[(i, p)] = c * x - s * y;
                    w[(i, q)] = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = (0..n).map(|j| w.column(j).norm()).collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sv
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Orthogonal factor of the QR decomposition of a Gaussian matrix.
pub fn random_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> DenseMatrix {
    gaussian_matrix(rng, n, n).qr().q()
}

#[test]
fn jacobi_oracle_on_known_spectra() {
    let d = DenseMatrix::from_row_slice(2, 3, &[3.0, 0.0, 0.0, 0.0, -4.0, 0.0]);
    let sv = jacobi_singular_values(&d);
    assert!((sv[0] - 4.0).abs() < 1e-14 && (sv[1] - 3.0).abs() < 1e-14);
    // [[1,1],[0,1]] has singular values φ and 1/φ
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let sv = jacobi_singular_values(&DenseMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]));
    assert!((sv[0] - phi).abs() < 1e-13 && (sv[1] - 1.0 / phi).abs() < 1e-13);
}
