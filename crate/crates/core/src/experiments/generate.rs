use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{rescale_to_contraction, DenseMatrix, Vector};
use crate::lowrank::CompletionProblem;
use crate::problem::MeasurementProblem;

/// Target spectral norm of generated sensing matrices.
pub const GENERATED_RHO: f64 = 0.99;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for trial `trial` at sweep coordinate `coord`.
pub fn derive_seed(master: u64, coord: u64, trial: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ coord) ^ trial)
}

fn normal_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DenseMatrix {
    let entries: Vec<f64> = (0..rows * cols).map(|_| rng.sample(StandardNormal)).collect();
    DenseMatrix::from_row_slice(rows, cols, &entries)
}

/// Gaussian sensing matrix rescaled to spectral norm 0.99, a `k`-sparse
/// Gaussian signal on a uniformly random support, and `y = A x* + σ g` with
/// the noise added after rescaling.
pub fn gen_sparse_problem(m: usize, n: usize, k: usize, noise_sigma: f64, seed: u64) -> Result<MeasurementProblem> {
    if k > n {
        return Err(Error::invalid("K", format!("sparsity {k} exceeds signal length {n}")));
    }
    if m == 0 || n == 0 {
        return Err(Error::invalid("M", "dimensions must be positive"));
    }
    if !(noise_sigma >= 0.0 && noise_sigma.is_finite()) {
        return Err(Error::invalid("noise", "must be finite and nonnegative"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw = normal_matrix(&mut rng, m, n);

    let mut support = index::sample(&mut rng, n, k).into_vec();
    support.sort_unstable();
    let mut x_true = Vector::zeros(n);
    for &i in &support {
        x_true[i] = rng.sample(StandardNormal);
    }

    let (a, _, scale) = rescale_to_contraction(&raw, &Vector::zeros(m), GENERATED_RHO)?;
    let mut y = &a * &x_true;
    if noise_sigma > 0.0 {
        for v in y.iter_mut() {
            *v += noise_sigma * rng.sample::<f64, _>(StandardNormal);
        }
    }
    let mut problem = MeasurementProblem::new(a, y)?
        .with_ground_truth(x_true)?
        .with_provenance(noise_sigma, seed);
    problem.scale_applied = scale;
    Ok(problem)
}

/// `n × n` matrix `G₁G₂ᵀ` with Gaussian `n × rank` factors, observed on a
/// uniformly random set of `⌈obs_frac · n²⌉` entries.
pub fn gen_completion_problem(n: usize, rank: usize, obs_frac: f64, seed: u64) -> Result<CompletionProblem> {
    if n == 0 {
        return Err(Error::invalid("N", "must be positive"));
    }
    if rank == 0 || rank > n {
        return Err(Error::invalid("rank", format!("must lie in 1..={n}, got {rank}")));
    }
    if !(obs_frac > 0.0 && obs_frac <= 1.0) {
        return Err(Error::invalid("obs", format!("must lie in (0, 1], got {obs_frac}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g1 = normal_matrix(&mut rng, n, rank);
    let g2 = normal_matrix(&mut rng, n, rank);
    let x_true = &g1 * g2.transpose();

    let total = n * n;
    // the small offset keeps e.g. 0.3 · 2500 from rounding up to 751
    let count = ((obs_frac * total as f64) - 1e-9).ceil().clamp(1.0, total as f64) as usize;
    let mut picked = index::sample(&mut rng, total, count).into_vec();
    picked.sort_unstable();
    let omega = picked.into_iter().map(|i| (i / n, i % n)).collect();

    let mut problem = CompletionProblem::from_ground_truth(x_true, omega, rank)?;
    problem.seed = seed;
    Ok(problem)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{nnz, spectral_norm};
    use crate::lowrank::numerical_rank;

    #[test]
    fn sparse_problem_is_deterministic() {
        let a = gen_sparse_problem(20, 40, 5, 0.01, 42).unwrap();
        let b = gen_sparse_problem(20, 40, 5, 0.01, 42).unwrap();
        assert_eq!(a, b);
        let c = gen_sparse_problem(20, 40, 5, 0.01, 43).unwrap();
        assert_ne!(a.a, c.a);
    }

    #[test]
    fn sparse_problem_shape() {
        let p = gen_sparse_problem(30, 60, 7, 0.0, 1).unwrap();
        assert_eq!(nnz(p.x_true.as_ref().unwrap()), 7);
        assert!(spectral_norm(&p.a).unwrap() <= 0.99 + 1e-6);
        assert!(p.scale_applied > 1.0);
        let residual = &p.y - &p.a * p.x_true.as_ref().unwrap();
        assert!(residual.norm() < 1e-12);
    }

    #[test]
    fn zero_sparsity_means_pure_noise() {
        let p = gen_sparse_problem(10, 20, 0, 0.5, 3).unwrap();
        assert_eq!(nnz(p.x_true.as_ref().unwrap()), 0);
        assert!(p.y.norm() > 0.0);
        let q = gen_sparse_problem(10, 20, 0, 0.0, 3).unwrap();
        assert_eq!(q.y, Vector::zeros(10));
        assert!(gen_sparse_problem(10, 20, 21, 0.0, 3).is_err());
    }

    #[test]
    fn completion_problem_properties() {
        let p = gen_completion_problem(12, 2, 1.0, 5).unwrap();
        assert_eq!(p.omega().len(), 144);
        assert_eq!(numerical_rank(p.x_true.as_ref().unwrap()).unwrap(), 2);
        let q = gen_completion_problem(50, 2, 0.3, 5).unwrap();
        assert_eq!(q.omega().len(), 750);
        assert_eq!(q, gen_completion_problem(50, 2, 0.3, 5).unwrap());
        assert!(gen_completion_problem(10, 2, 1.2, 5).is_err());
        assert!(gen_completion_problem(10, 2, 0.0, 5).is_err());
    }

    #[test]
    fn derived_seeds_differ() {
        let a = derive_seed(7, 10, 0);
        assert_ne!(a, derive_seed(7, 10, 1));
        assert_ne!(a, derive_seed(7, 20, 0));
        assert_ne!(a, derive_seed(8, 10, 0));
        assert_eq!(a, derive_seed(7, 10, 0));
    }
}
