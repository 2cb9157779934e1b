//! Starting configurations for the majorization.

use rayon::prelude::*;

use crate::error::{JofcError, Result};
use crate::matrix::{double_center, svd_small, symmetric_top_eigenpairs, DenseMatrix, DissimilarityMatrix};
use crate::problem::{Configuration, OmnibusProblem};

/// Classical (Torgerson) MDS of a dissimilarity matrix into `d` dimensions.
///
/// Negative eigenvalues among the top `d` are clamped to zero, which leaves
/// the corresponding coordinate column at zero.
pub fn cmds(delta: &DissimilarityMatrix, d: usize) -> Result<DenseMatrix> {
    cmds_dense(delta.matrix(), d)
}

fn cmds_dense(delta: &DenseMatrix, d: usize) -> Result<DenseMatrix> {
    let n = delta.rows();
    if d == 0 || d > n {
        return Err(JofcError::InvalidInput(format!(
            "cannot embed {n} objects into {d} dimensions"
        )));
    }
    let squared = DenseMatrix::new(n, n, delta.as_slice().iter().map(|v| v * v).collect())?;
    let p = double_center(&squared)?;
    let pairs = symmetric_top_eigenpairs(&p, d)?;
    let mut x = DenseMatrix::zeros(n, d);
    for (c, pair) in pairs.iter().enumerate() {
        let scale = pair.value.max(0.0).sqrt();
        for r in 0..n {
            x[(r, c)] = pair.vector[r] * scale;
        }
    }
    x.center_columns();
    Ok(x)
}

/// Rotation (or reflection) of `source` that best matches `target` in
/// Frobenius norm. Both are centered first; the result is centered.
///
/// With `targetᵀ source = U Σ Vᵀ` the minimizer is `source · V Uᵀ`.
pub fn orthogonal_procrustes(source: &DenseMatrix, target: &DenseMatrix) -> Result<DenseMatrix> {
    let rotation = procrustes_rotation(source, target)?;
    let mut s = source.clone();
    s.center_columns();
    s.matmul(&rotation)
}

/// The d×d orthogonal factor used by [`orthogonal_procrustes`].
pub fn procrustes_rotation(source: &DenseMatrix, target: &DenseMatrix) -> Result<DenseMatrix> {
    if source.rows() != target.rows() || source.cols() != target.cols() {
        return Err(JofcError::Shape(format!(
            "Procrustes needs equal shapes, got {}x{} and {}x{}",
            source.rows(),
            source.cols(),
            target.rows(),
            target.cols()
        )));
    }
    let mut s = source.clone();
    let mut t = target.clone();
    s.center_columns();
    t.center_columns();
    let cross = t.transpose().matmul(&s)?;
    let (u, _, v) = svd_small(&cross)?;
    v.matmul(&u.transpose())
}

/// cMDS of the modality average as an anchor, then each modality's own cMDS
/// rotated onto it.
pub fn averaged_procrustes_init(problem: &OmnibusProblem, d: usize) -> Result<Configuration> {
    let anchor = cmds(&problem.average(), d)?;
    let blocks = problem
        .modalities()
        .par_iter()
        .map(|delta| orthogonal_procrustes(&cmds(delta, d)?, &anchor))
        .collect::<Result<Vec<_>>>()?;
    Configuration::from_blocks(&blocks)
}

/// cMDS of the full omnibus with cross-modality blocks imputed as
/// `(Δ_i + Δ_j) / 2` (zero on matched pairs).
pub fn imputed_omnibus_init(problem: &OmnibusProblem, d: usize, cap: usize) -> Result<Configuration> {
    let (m, n) = (problem.m(), problem.n());
    if m * n > cap {
        return Err(JofcError::SizeCap { size: m * n, cap });
    }
    let omnibus = DenseMatrix::from_fn(m * n, m * n, |r, c| {
        let (bi, bj, i, j) = (r / n, c / n, r % n, c % n);
        if bi == bj {
            problem.modality(bi).get(i, j)
        } else if i == j {
            0.0
        } else {
            0.5 * (problem.modality(bi).get(i, j) + problem.modality(bj).get(i, j))
        }
    });
    Configuration::new(cmds_dense(&omnibus, d)?, m, n)
}
