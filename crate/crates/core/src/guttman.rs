//! Guttman transforms `X ← L† B(X) X`.
//!
//! [`FastStep`] uses that `B(X)` is block diagonal with zero row sums, so
//! the `Z ⊗ J_n` part of `L†` drops out and the update is
//! `X^(j) ← Σ_ℓ (𝒲⁻¹)_{jℓ} B_ℓ X^(ℓ)`. [`ReferenceStep`] materializes the
//! dense omnibus matrices and multiplies through.

use rayon::prelude::*;

use crate::error::{JofcError, Result};
use crate::matrix::{pseudoinverse_oracle, row_distance, DenseMatrix};
use crate::problem::{Configuration, OmnibusProblem};
use crate::stress::b_block_product;
use crate::weights::{dense_weight_matrix, laplacian, laplacian_pseudoinverse_factors, ScriptW, WeightSpec};

/// Structured update with 𝒲⁻¹ cached.
#[derive(Clone, Debug)]
pub struct FastStep {
    w_inv: DenseMatrix,
    within: Vec<f64>,
    parallel: bool,
}

impl FastStep {
    pub fn new(problem: &OmnibusProblem, spec: &WeightSpec, parallel: bool) -> Result<Self> {
        let (m, n) = (problem.m(), problem.n());
        let sw = ScriptW::new(spec, m, n)?;
        Ok(Self {
            w_inv: sw.inverse().clone(),
            within: (0..m).map(|i| spec.within(i)).collect(),
            parallel,
        })
    }

    pub fn apply(&self, config: &Configuration, problem: &OmnibusProblem) -> Result<Configuration> {
        config.check_against(problem)?;
        let (m, n, d) = (problem.m(), problem.n(), config.d());
        let product = |l: usize| b_block_product(config.block(l), problem.modality(l), self.within[l], d);
        let products: Vec<Vec<f64>> = if self.parallel {
            (0..m).into_par_iter().map(product).collect()
        } else {
            (0..m).map(product).collect()
        };
        let mut next = DenseMatrix::zeros(m * n, d);
        for j in 0..m {
            let out = &mut next.as_mut_slice()[j * n * d..(j + 1) * n * d];
            for (l, p) in products.iter().enumerate() {
                let coef = self.w_inv[(j, l)];
                for (o, v) in out.iter_mut().zip(p) {
                    *o += coef * v;
                }
            }
        }
        if next.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(JofcError::NonFinite("Guttman update".into()));
        }
        Configuration::new(next, m, n)
    }
}

/// One structured Guttman step.
pub fn guttman_step_fast(config: &Configuration, problem: &OmnibusProblem, spec: &WeightSpec) -> Result<Configuration> {
    FastStep::new(problem, spec, false)?.apply(config, problem)
}

/// Where the dense reference takes its `L†` from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PseudoinverseSource {
    /// Closed-form Kronecker factors, materialized.
    Factors,
    /// Eigendecomposition of the dense Laplacian.
    Oracle,
}

/// Dense update with `L†`, `W` and the omnibus Δ materialized.
#[derive(Clone, Debug)]
pub struct ReferenceStep {
    l_pinv: DenseMatrix,
    weights: DenseMatrix,
    omnibus: DenseMatrix,
}

impl ReferenceStep {
    pub fn new(problem: &OmnibusProblem, spec: &WeightSpec, source: PseudoinverseSource, cap: usize) -> Result<Self> {
        let (m, n) = (problem.m(), problem.n());
        let weights = dense_weight_matrix(spec, m, n, cap)?;
        let l_pinv = match source {
            PseudoinverseSource::Factors => laplacian_pseudoinverse_factors(spec, m, n)?.materialize(cap)?,
            PseudoinverseSource::Oracle => pseudoinverse_oracle(&laplacian(&weights))?,
        };
        Ok(Self {
            l_pinv,
            weights,
            omnibus: problem.dense_omnibus(cap)?,
        })
    }

    pub fn pseudoinverse(&self) -> &DenseMatrix {
        &self.l_pinv
    }

    pub fn apply(&self, config: &Configuration, problem: &OmnibusProblem) -> Result<Configuration> {
        config.check_against(problem)?;
        let b = dense_b_matrix(config.stacked(), &self.omnibus, &self.weights)?;
        let bx = b.matmul(config.stacked())?;
        let next = self.l_pinv.matmul(&bx)?;
        if next.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(JofcError::NonFinite("Guttman update".into()));
        }
        Configuration::new(next, problem.m(), problem.n())
    }
}

/// One dense Guttman step, `L†` from the closed-form factors.
pub fn guttman_step_reference(
    config: &Configuration,
    problem: &OmnibusProblem,
    spec: &WeightSpec,
    cap: usize,
) -> Result<Configuration> {
    ReferenceStep::new(problem, spec, PseudoinverseSource::Factors, cap)?.apply(config, problem)
}

/// Dense `B(X)` for arbitrary weights and dissimilarities:
/// `-W_ij Δ_ij / d_ij(X)` off the diagonal (0 when `d_ij = 0`), negated row
/// sums on it.
pub fn dense_b_matrix(x: &DenseMatrix, delta: &DenseMatrix, weights: &DenseMatrix) -> Result<DenseMatrix> {
    let k = x.rows();
    if delta.rows() != k || delta.cols() != k || weights.rows() != k || weights.cols() != k {
        return Err(JofcError::Shape(format!(
            "B matrix needs {k}x{k} dissimilarities and weights"
        )));
    }
    let mut b = DenseMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..i {
            let w = weights[(i, j)];
            if w == 0.0 {
                continue;
            }
            let dist = row_distance(x.row(i), x.row(j));
            if dist != 0.0 {
                let v = -w * delta[(i, j)] / dist;
                b[(i, j)] = v;
                b[(j, i)] = v;
            }
        }
    }
    for i in 0..k {
        let off: f64 = b.row(i).iter().sum();
        b[(i, i)] = -off;
    }
    Ok(b)
}
