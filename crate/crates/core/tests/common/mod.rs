#![allow(dead_code)]

use jofc::{euclidean_distance_matrix, Configuration, DenseMatrix, OmnibusProblem, SeededRng, WeightSpec};

pub fn random_points(rng: &mut SeededRng, n: usize, d: usize) -> DenseMatrix {
    DenseMatrix::from_fn(n, d, |_, _| rng.uniform_in(-2.0, 2.0))
}

/// `m` Euclidean modalities of `n` objects drawn in 3 dimensions.
pub fn random_problem(rng: &mut SeededRng, m: usize, n: usize) -> OmnibusProblem {
    let mods = (0..m)
        .map(|_| euclidean_distance_matrix(&random_points(rng, n, 3)))
        .collect();
    OmnibusProblem::new(mods).unwrap()
}

pub fn random_config(rng: &mut SeededRng, m: usize, n: usize, d: usize) -> Configuration {
    Configuration::new(random_points(rng, m * n, d), m, n).unwrap()
}

/// One spec of each family, scaled by `w`.
pub fn weight_specs(rng: &mut SeededRng, m: usize, w: f64) -> Vec<WeightSpec> {
    let mut table = vec![vec![0.0; m]; m];
    for i in 0..m {
        table[i][i] = rng.uniform_in(0.5, 2.0);
        for j in 0..i {
            let v = w * rng.uniform_in(0.5, 1.5);
            table[i][j] = v;
            table[j][i] = v;
        }
    }
    vec![
        WeightSpec::uniform(w),
        WeightSpec::GeneralSymmetric { matrix: table },
        WeightSpec::Product {
            within: (0..m).map(|_| rng.uniform_in(0.5, 2.0)).collect(),
            c: w,
        },
    ]
}

/// Brute-force raw stress over all pairs of the omnibus, from the weight
/// definition alone (no structure used).
pub fn brute_force_stress(config: &Configuration, problem: &OmnibusProblem, spec: &WeightSpec) -> f64 {
    let (m, n) = (problem.m(), problem.n());
    let x = config.stacked();
    let mut total = 0.0;
    for r in 0..m * n {
        for c in 0..r {
            let (bi, bj, i, j) = (r / n, c / n, r % n, c % n);
            let (weight, target) = if bi == bj {
                (spec.within(bi), problem.modality(bi).get(i, j))
            } else if i == j {
                (spec.cross(bi, bj), 0.0)
            } else {
                continue;
            };
            let dist: f64 = x
                .row(r)
                .iter()
                .zip(x.row(c))
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            total += weight * (target - dist).powi(2);
        }
    }
    total
}

/// Central-difference gradient of `f` at `x`.
pub fn finite_difference(x: &DenseMatrix, h: f64, mut f: impl FnMut(&DenseMatrix) -> f64) -> DenseMatrix {
    let mut grad = DenseMatrix::zeros(x.rows(), x.cols());
    let mut probe = x.clone();
    for r in 0..x.rows() {
        for c in 0..x.cols() {
            let base = x[(r, c)];
            probe.as_mut_slice()[r * x.cols() + c] = base + h;
            let up = f(&probe);
            probe.as_mut_slice()[r * x.cols() + c] = base - h;
            let down = f(&probe);
            probe.as_mut_slice()[r * x.cols() + c] = base;
            grad.as_mut_slice()[r * x.cols() + c] = (up - down) / (2.0 * h);
        }
    }
    grad
}

pub fn relative_difference(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    a.sub(b).unwrap().frobenius_norm() / b.frobenius_norm().max(f64::MIN_POSITIVE)
}
