//! Structured formulas against dense brute-force oracles.

mod common;

use common::*;
use jofc::matrix::{double_center, symmetric_eigen};
use jofc::oos::oos_stress_gradient;
use jofc::weights::{dense_weight_matrix, kronecker_sum_inverse, laplacian};
use jofc::*;
use proptest::prelude::*;

#[test]
fn laplacian_pseudoinverse_grid() {
    let mut rng = SeededRng::new(1);
    for m in [1, 2, 3, 5] {
        for n in [2, 4, 7] {
            for w in [0.1, 1.0, 10.0] {
                for spec in weight_specs(&mut rng, m, w) {
                    let l = laplacian(&dense_weight_matrix(&spec, m, n, DEFAULT_DENSE_CAP).unwrap());
                    assert!(l.row_sums().iter().all(|s| s.abs() < 1e-10));
                    let oracle = pseudoinverse_oracle(&l).unwrap();
                    let factors = laplacian_pseudoinverse_factors(&spec, m, n)
                        .unwrap()
                        .materialize(DEFAULT_DENSE_CAP)
                        .unwrap();
                    let err = factors.sub(&oracle).unwrap().frobenius_norm();
                    assert!(err < 1e-8, "m={m} n={n} w={w} {spec:?}: {err}");

                    // (L + J/(mn))⁻¹ - J/(mn) = L†
                    let k = (m * n) as f64;
                    let shift = DenseMatrix::from_fn(m * n, m * n, |_, _| 1.0 / k);
                    let alt = l.add(&shift).unwrap().inverse().unwrap().sub(&shift).unwrap();
                    assert!(alt.sub(&oracle).unwrap().frobenius_norm() < 1e-8);
                }
            }
        }
    }
}

#[test]
fn closed_form_script_w_inverse() {
    let mut rng = SeededRng::new(2);
    for m in 1..6 {
        for n in [2, 5, 11] {
            for w in [0.1, 1.0, 10.0] {
                for spec in weight_specs(&mut rng, m, w) {
                    let sw = script_w(&spec, m, n).unwrap();
                    let closed = script_w_inverse(&spec, m, n).unwrap();
                    let direct = sw.inverse().unwrap();
                    assert!(closed.max_abs_diff(&direct) < 1e-12, "{spec:?}");
                    let prod = sw.matmul(&closed).unwrap();
                    assert!(prod.max_abs_diff(&DenseMatrix::identity(m)) < 1e-12);
                }
            }
        }
    }
}

#[test]
fn fast_step_equals_reference_on_grid() {
    let mut rng = SeededRng::new(3);
    for m in [1, 2, 3] {
        for n in [3, 5, 8] {
            for d in [1, 2, 3] {
                for w in [0.5, 1.0, 10.0] {
                    let problem = random_problem(&mut rng, m, n);
                    let config = random_config(&mut rng, m, n, d);
                    for spec in weight_specs(&mut rng, m, w) {
                        let fast = guttman_step_fast(&config, &problem, &spec).unwrap();
                        let reference = guttman_step_reference(&config, &problem, &spec, DEFAULT_DENSE_CAP).unwrap();
                        let oracle = ReferenceStep::new(&problem, &spec, PseudoinverseSource::Oracle, DEFAULT_DENSE_CAP)
                            .unwrap()
                            .apply(&config, &problem)
                            .unwrap();
                        let diff = fast.stacked().max_abs_diff(reference.stacked());
                        assert!(diff < 1e-8, "m={m} n={n} d={d} {spec:?}: {diff}");
                        assert!(fast.stacked().max_abs_diff(oracle.stacked()) < 1e-8);
                    }
                }
            }
        }
    }
}

#[test]
fn oos_fast_step_equals_reference_on_grid() {
    let mut rng = SeededRng::new(4);
    for m in [1, 2, 4] {
        for n in [5, 9] {
            for d in [1, 2] {
                for w in [1.0, 10.0] {
                    let x = random_config(&mut rng, m, n, d);
                    let deltas = OosDissimilarity::new(
                        (0..m).map(|_| (0..n).map(|_| rng.uniform_in(0.1, 3.0)).collect()).collect(),
                    )
                    .unwrap();
                    let y = random_points(&mut rng, m, d);
                    let fast = oos_step_fast(&y, &x, &deltas, w).unwrap();
                    let reference = oos_step_reference(&y, &x, &deltas, w, DEFAULT_DENSE_CAP).unwrap();
                    assert!(fast.max_abs_diff(&reference) < 1e-9);
                }
            }
        }
    }
}

#[test]
fn stress_matches_brute_force() {
    let mut rng = SeededRng::new(5);
    for m in 1..4 {
        let problem = random_problem(&mut rng, m, 6);
        let config = random_config(&mut rng, m, 6, 2);
        for spec in weight_specs(&mut rng, m, 2.0) {
            let s = raw_stress(&config, &problem, &spec).unwrap();
            let b = brute_force_stress(&config, &problem, &spec);
            assert!((s - b).abs() < 1e-9 * b.max(1.0));
        }
    }
}

#[test]
fn gradients_match_finite_differences() {
    let mut rng = SeededRng::new(6);
    for _ in 0..5 {
        let (m, n) = (3, 6);
        let problem = random_problem(&mut rng, m, n);
        let config = random_config(&mut rng, m, n, 2);
        for spec in weight_specs(&mut rng, m, 1.5) {
            let analytic = stress_gradient(&config, &problem, &spec).unwrap();
            let numeric = finite_difference(config.stacked(), 1e-5, |x| {
                raw_stress(&Configuration::new(x.clone(), m, n).unwrap(), &problem, &spec).unwrap()
            });
            assert!(relative_difference(&analytic, &numeric) < 1e-4);
        }
        let deltas = OosDissimilarity::new((0..m).map(|_| (0..n).map(|_| rng.uniform_in(0.1, 3.0)).collect()).collect()).unwrap();
        let y = random_points(&mut rng, m, 2);
        let analytic = oos_stress_gradient(&y, &config, &deltas, 2.0).unwrap();
        let numeric = finite_difference(&y, 1e-5, |y| oos_stress(y, &config, &deltas, 2.0).unwrap());
        assert!(relative_difference(&analytic, &numeric) < 1e-4);
    }
}

#[test]
fn kronecker_identity_on_random_factors() {
    let mut rng = SeededRng::new(7);
    let (m, n) = (3, 4);
    let a = DenseMatrix::from_fn(m, m, |i, j| if i == j { 4.0 } else { 0.0 } + rng.uniform_in(-0.5, 0.5));
    let b = DenseMatrix::from_fn(m, m, |_, _| rng.uniform_in(-0.1, 0.1));
    let inv = kronecker_sum_inverse(&a, &b, n).unwrap().materialize(DEFAULT_DENSE_CAP).unwrap();
    let ones = DenseMatrix::ones(n, n);
    let forward = a.kron(&DenseMatrix::identity(n)).add(&b.kron(&ones)).unwrap();
    let prod = forward.matmul(&inv).unwrap();
    assert!(prod.max_abs_diff(&DenseMatrix::identity(m * n)) < 1e-9);
}

#[test]
fn jacobi_and_library_eigensolvers_agree() {
    let mut rng = SeededRng::new(8);
    let x = random_points(&mut rng, 30, 4);
    let sq = DenseMatrix::from_fn(30, 30, |i, j| {
        x.row(i).iter().zip(x.row(j)).map(|(a, b)| (a - b).powi(2)).sum()
    });
    let p = double_center(&sq).unwrap();
    let mut jac: Vec<f64> = jofc::matrix::jacobi_eigen(&p).unwrap().iter().map(|e| e.value).collect();
    let lib = nalgebra::DMatrix::from_row_slice(30, 30, p.as_slice()).symmetric_eigen();
    let mut lib: Vec<f64> = lib.eigenvalues.iter().copied().collect();
    jac.sort_by(f64::total_cmp);
    lib.sort_by(f64::total_cmp);
    for (a, b) in jac.iter().zip(&lib) {
        assert!((a - b).abs() < 1e-9 * p.frobenius_norm());
    }
    let sorted = symmetric_eigen(&p).unwrap();
    assert!(sorted.windows(2).all(|w| w[0].value >= w[1].value));
}

fn arb_instance() -> impl Strategy<Value = (usize, usize, usize, u64)> {
    (1usize..4, 3usize..8, 1usize..4, any::<u64>())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn steps_are_monotone_and_centered((m, n, d, seed) in arb_instance(), w in 0.1f64..10.0) {
        let mut rng = SeededRng::new(seed);
        let problem = random_problem(&mut rng, m, n);
        let mut config = random_config(&mut rng, m, n, d);
        let specs = weight_specs(&mut rng, m, w);
        let spec = &specs[(seed % 3) as usize];
        let mut s = raw_stress(&config, &problem, spec).unwrap();
        for _ in 0..10 {
            config = guttman_step_fast(&config, &problem, spec).unwrap();
            let next = raw_stress(&config, &problem, spec).unwrap();
            prop_assert!(next <= s + 1e-9);
            prop_assert!(config.max_abs_column_mean() < 1e-9);
            s = next;
        }
    }

    #[test]
    fn stress_is_invariant_under_rigid_motion((m, n, d, seed) in arb_instance(), shift in -5.0f64..5.0) {
        let mut rng = SeededRng::new(seed);
        let problem = random_problem(&mut rng, m, n);
        let config = random_config(&mut rng, m, n, d);
        let spec = WeightSpec::uniform(1.3);
        let base = raw_stress(&config, &problem, &spec).unwrap();

        let moved = DenseMatrix::from_fn(m * n, d, |r, c| config.stacked()[(r, c)] + shift * (c as f64 + 1.0));
        let moved = raw_stress(&Configuration::new(moved, m, n).unwrap(), &problem, &spec).unwrap();
        prop_assert!((moved - base).abs() < 1e-9 * base.max(1.0));

        let (q, _, _) = jofc::matrix::svd_small(&random_points(&mut rng, d, d)).unwrap();
        let rotated = config.stacked().matmul(&q).unwrap();
        let rotated = raw_stress(&Configuration::new(rotated, m, n).unwrap(), &problem, &spec).unwrap();
        prop_assert!((rotated - base).abs() < 1e-9 * base.max(1.0));
    }

    #[test]
    fn oos_steps_are_monotone((m, n, d, seed) in arb_instance(), w in 0.1f64..10.0) {
        let mut rng = SeededRng::new(seed);
        let x = random_config(&mut rng, m, n, d);
        let deltas = OosDissimilarity::new(
            (0..m).map(|_| (0..n).map(|_| rng.uniform_in(0.0, 3.0)).collect()).collect(),
        ).unwrap();
        let mut y = random_points(&mut rng, m, d);
        let mut s = oos_stress(&y, &x, &deltas, w).unwrap();
        for _ in 0..10 {
            y = oos_step_fast(&y, &x, &deltas, w).unwrap();
            let next = oos_stress(&y, &x, &deltas, w).unwrap();
            prop_assert!(next <= s + 1e-9);
            s = next;
        }
    }

    #[test]
    fn distance_matrices_satisfy_triangle_inequality(seed in any::<u64>(), n in 3usize..10, d in 1usize..4) {
        let mut rng = SeededRng::new(seed);
        let delta = euclidean_distance_matrix(&random_points(&mut rng, n, d));
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    prop_assert!(delta.get(i, k) <= delta.get(i, j) + delta.get(j, k) + 1e-12);
                }
            }
        }
    }

    #[test]
    fn procrustes_preserves_distances(seed in any::<u64>(), n in 3usize..12, d in 1usize..4) {
        let mut rng = SeededRng::new(seed);
        let source = random_points(&mut rng, n, d);
        let target = random_points(&mut rng, n, d);
        let fit = orthogonal_procrustes(&source, &target).unwrap();
        let before = euclidean_distance_matrix(&source);
        let after = euclidean_distance_matrix(&fit);
        prop_assert!(before.matrix().max_abs_diff(after.matrix()) < 1e-10);
        prop_assert!(fit.column_means().iter().all(|v| v.abs() < 1e-10));
    }
}
