//! Raw stress of a stacked configuration and the block-diagonal B matrix.
//!
//! Only the `m·C(n,2)` within-modality distances and the `C(m,2)·n` matched
//! cross-modality distances enter the criterion; nothing here touches the
//! full mn×mn omnibus.

use crate::error::{JofcError, Result};
use crate::matrix::{row_distance, squared_distance, DenseMatrix, DissimilarityMatrix};
use crate::problem::{Configuration, OmnibusProblem};
use crate::weights::WeightSpec;

fn check(config: &Configuration, problem: &OmnibusProblem, spec: &WeightSpec) -> Result<()> {
    config.check_against(problem)?;
    spec.validate(problem.m())
}

/// Unweighted fidelity of one modality, `Σ_{j<k} (Δ_jk - d_jk)²`.
pub fn fidelity(block: &[f64], delta: &DissimilarityMatrix, d: usize) -> f64 {
    let n = delta.n();
    let mut total = 0.0;
    for j in 0..n {
        let xj = &block[j * d..(j + 1) * d];
        let row = delta.matrix().row(j);
        for k in 0..j {
            let r = row[k] - row_distance(xj, &block[k * d..(k + 1) * d]);
            total += r * r;
        }
    }
    total
}

/// Sum of squared distances between matched rows of two blocks.
pub fn commensurability(a: &[f64], b: &[f64]) -> f64 {
    squared_distance(a, b)
}

/// Raw stress `Σ_i w_ii·fidelity_i + Σ_{i<j} w_ij·Σ_ℓ d(X^(i)_ℓ, X^(j)_ℓ)²`.
pub fn raw_stress(config: &Configuration, problem: &OmnibusProblem, spec: &WeightSpec) -> Result<f64> {
    check(config, problem, spec)?;
    let (m, d) = (problem.m(), config.d());
    let mut total = 0.0;
    for i in 0..m {
        total += spec.within(i) * fidelity(config.block(i), problem.modality(i), d);
    }
    for i in 0..m {
        for j in (i + 1)..m {
            total += spec.cross(i, j) * commensurability(config.block(i), config.block(j));
        }
    }
    if !total.is_finite() {
        return Err(JofcError::NonFinite("raw stress".into()));
    }
    Ok(total)
}

/// Raw stress divided by `C(nm, 2)`.
pub fn normalized_stress(stress: f64, m: usize, n: usize) -> f64 {
    stress / pair_count(m * n)
}

pub(crate) fn pair_count(k: usize) -> f64 {
    let k = k as f64;
    k * (k - 1.0) / 2.0
}

/// The diagonal blocks `B_1..B_m` of `B(X)`, materialized.
///
/// Off-diagonal entries are `-w_ll Δ_jk / d_jk` (zero when `d_jk = 0`) and
/// the diagonal is the negated off-diagonal row sum.
pub fn b_blocks(config: &Configuration, problem: &OmnibusProblem, spec: &WeightSpec) -> Result<Vec<DenseMatrix>> {
    check(config, problem, spec)?;
    let (n, d) = (problem.n(), config.d());
    Ok((0..problem.m())
        .map(|l| {
            let block = config.block(l);
            let delta = problem.modality(l);
            let w = spec.within(l);
            let mut b = DenseMatrix::zeros(n, n);
            for j in 0..n {
                for k in 0..j {
                    let dist = row_distance(&block[j * d..(j + 1) * d], &block[k * d..(k + 1) * d]);
                    if dist != 0.0 {
                        let v = -w * delta.get(j, k) / dist;
                        b[(j, k)] = v;
                        b[(k, j)] = v;
                    }
                }
            }
            for j in 0..n {
                let off: f64 = b.row(j).iter().sum();
                b[(j, j)] = -off;
            }
            b
        })
        .collect())
}

/// `B_ℓ X^(ℓ)` without materializing `B_ℓ`; row-major n×d.
pub fn b_block_product(block: &[f64], delta: &DissimilarityMatrix, weight: f64, d: usize) -> Vec<f64> {
    let n = delta.n();
    let mut out = vec![0.0; n * d];
    for j in 0..n {
        let row = delta.matrix().row(j);
        for k in 0..j {
            let target = row[k];
            if target == 0.0 {
                continue;
            }
            let (xj, xk) = (&block[j * d..(j + 1) * d], &block[k * d..(k + 1) * d]);
            let dist = row_distance(xj, xk);
            if dist == 0.0 {
                continue;
            }
            let c = weight * target / dist;
            for t in 0..d {
                let diff = c * (xj[t] - xk[t]);
                out[j * d + t] += diff;
                out[k * d + t] -= diff;
            }
        }
    }
    out
}

/// Gradient `2LX - 2B(X)X` of the raw stress, in stacked layout.
///
/// Uses `L = 𝒲 ⊗ I_n - diag(w_ii) ⊗ J_n`, so the block `i` of `LX` is
/// `Σ_j 𝒲_ij X^(j) - w_ii 1 1ᵀ X^(i)`.
pub fn stress_gradient(config: &Configuration, problem: &OmnibusProblem, spec: &WeightSpec) -> Result<DenseMatrix> {
    check(config, problem, spec)?;
    let (m, n, d) = (problem.m(), problem.n(), config.d());
    let sw = crate::weights::script_w(spec, m, n)?;
    let mut grad = DenseMatrix::zeros(m * n, d);
    for i in 0..m {
        let bx = b_block_product(config.block(i), problem.modality(i), spec.within(i), d);
        let sums: Vec<f64> = (0..d)
            .map(|t| (0..n).map(|r| config.block(i)[r * d + t]).sum())
            .collect();
        let out = &mut grad.as_mut_slice()[i * n * d..(i + 1) * n * d];
        for j in 0..m {
            let coef = sw[(i, j)];
            for (o, x) in out.iter_mut().zip(config.block(j)) {
                *o += coef * x;
            }
        }
        for r in 0..n {
            for t in 0..d {
                out[r * d + t] -= spec.within(i) * sums[t] + bx[r * d + t];
                out[r * d + t] *= 2.0;
            }
        }
    }
    Ok(grad)
}
