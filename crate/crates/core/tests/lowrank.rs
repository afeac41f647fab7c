mod common;

use common::{gaussian_matrix, jacobi_singular_values, random_orthogonal, rng};
use logshrink::lowrank::{
    complete, completion_step, nuclear_norm, numerical_rank, sv_threshold, sv_threshold_topk, CompletionProblem,
};
use logshrink::{DenseMatrix, SolverConfig, ThresholdKind, ThresholdRule};
use proptest::prelude::*;
use rand::seq::index;

fn rule_strategy() -> impl Strategy<Value = ThresholdRule> {
    prop_oneof![
        (0.0..3.0f64).prop_map(|l| ThresholdRule::soft(l).unwrap()),
        (0.0..3.0f64).prop_map(|t| ThresholdRule::hard(t).unwrap()),
        (0.05..2.0f64, 0.001..0.1f64).prop_map(|(l, d)| ThresholdRule::log(l, d).unwrap()),
    ]
}

fn assert_spectra_close(a: &[f64], b: &[f64], tol: f64) {
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(b) {
        assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
    }
}

#[test]
fn nuclear_norm_matches_jacobi_oracle() {
    let mut r = rng(1);
    for _ in 0..20 {
        let x = gaussian_matrix(&mut r, 6, 4);
        let oracle: f64 = jacobi_singular_values(&x).iter().sum();
        let got = nuclear_norm(&x).unwrap();
        assert!((got - oracle).abs() <= 1e-8 * oracle);
    }
}

#[test]
fn topk_hard_keeps_low_rank_matrices() {
    let mut r = rng(2);
    let x = gaussian_matrix(&mut r, 8, 2) * gaussian_matrix(&mut r, 2, 7);
    let out = sv_threshold_topk(&x, 2, ThresholdKind::Hard, 0.01).unwrap();
    assert!((&out - &x).norm() < 1e-10, "{}", (&out - &x).norm());
    let y = gaussian_matrix(&mut r, 5, 4);
    let out = sv_threshold_topk(&y, 4, ThresholdKind::Hard, 0.01).unwrap();
    assert!((&out - &y).norm() < 1e-10, "{}", (&out - &y).norm());
}

#[test]
fn completion_on_small_instances_mostly_succeeds() {
    let config = SolverConfig::default().with_step_tol(0.0);
    let mut successes = 0;
    let seeds = 10;
    for seed in 0..seeds {
        let mut r = rng(100 + seed);
        let truth = gaussian_matrix(&mut r, 20, 2) * gaussian_matrix(&mut r, 2, 20);
        let picked = index::sample(&mut r, 400, 240).into_vec();
        let omega: Vec<(usize, usize)> = picked.into_iter().map(|i| (i / 20, i % 20)).collect();
        let problem = CompletionProblem::from_ground_truth(truth, omega, 2).unwrap();
        let (_, trace) = complete(&problem, ThresholdKind::Hard, 0.01, &config).unwrap();
        let last = trace.records.last().unwrap();
        if last.frob_error.unwrap() < 1e-3 {
            successes += 1;
        }
    }
    assert!(successes * 10 >= seeds * 8, "{successes}/{seeds}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spectrum_is_thresholded_spectrum(seed in any::<u64>(), rows in 1usize..7, cols in 1usize..7, rule in rule_strategy()) {
        let x = gaussian_matrix(&mut rng(seed), rows, cols);
        let expected: Vec<f64> = {
            let mut s: Vec<f64> = jacobi_singular_values(&x).iter().map(|&s| rule.apply_scalar(s)).collect();
            s.sort_by(|a, b| b.partial_cmp(a).unwrap());
            s
        };
        let got = jacobi_singular_values(&sv_threshold(&x, &rule).unwrap());
        assert_spectra_close(&got, &expected, 1e-8);
    }

    #[test]
    fn orthogonal_invariance(seed in any::<u64>(), rows in 1usize..6, cols in 1usize..6, rule in rule_strategy()) {
        let mut r = rng(seed);
        let x = gaussian_matrix(&mut r, rows, cols);
        let p = random_orthogonal(&mut r, rows);
        let q = random_orthogonal(&mut r, cols);
        let rotated = &p * &x * q.transpose();
        let a = jacobi_singular_values(&sv_threshold(&x, &rule).unwrap());
        let b = jacobi_singular_values(&sv_threshold(&rotated, &rule).unwrap());
        assert_spectra_close(&a, &b, 1e-8);
    }

    #[test]
    fn topk_bounds_numerical_rank(seed in any::<u64>(), k in 1usize..5, kind in prop_oneof![
        Just(ThresholdKind::Soft), Just(ThresholdKind::Hard), Just(ThresholdKind::Log)
    ]) {
        let x = gaussian_matrix(&mut rng(seed), 6, 5);
        let out = sv_threshold_topk(&x, k, kind, 0.01).unwrap();
        prop_assert!(numerical_rank(&out).unwrap() <= k);
    }

    #[test]
    fn soft_shrinkage_never_grows_nuclear_norm(seed in any::<u64>(), lambda in 0.0..3.0f64) {
        let x = gaussian_matrix(&mut rng(seed), 5, 6);
        let out = sv_threshold(&x, &ThresholdRule::soft(lambda).unwrap()).unwrap();
        prop_assert!(nuclear_norm(&out).unwrap() <= nuclear_norm(&x).unwrap() + 1e-12);
    }

    #[test]
    fn completion_step_is_idempotent(seed in any::<u64>(), count in 0usize..30) {
        let mut r = rng(seed);
        let truth = gaussian_matrix(&mut r, 5, 6);
        let omega: Vec<(usize, usize)> = index::sample(&mut r, 30, count).into_iter().map(|i| (i / 6, i % 6)).collect();
        let problem = CompletionProblem::from_ground_truth(truth, omega.clone(), 1).unwrap();
        let x: DenseMatrix = gaussian_matrix(&mut r, 5, 6);
        let once = completion_step(&x, &problem).unwrap();
        let twice = completion_step(&once, &problem).unwrap();
        prop_assert_eq!(&once, &twice);
        for i in 0..5 {
            for j in 0..6 {
                if !omega.contains(&(i, j)) {
                    prop_assert_eq!(once[(i, j)], x[(i, j)]);
                }
            }
        }
    }
}
