//! Hold-one-out comparison of out-of-sample and in-sample embeddings.

use crate::error::{JofcError, Result};
use crate::init::procrustes_rotation;
use crate::matrix::{row_distance, DenseMatrix, DissimilarityMatrix};
use crate::oos::{oos_embed, OosDissimilarity, OosOptions, OosResult};
use crate::problem::{Configuration, OmnibusProblem};
use crate::solver::{fjofc_embed, EmbeddingResult, SolveOptions};
use crate::weights::WeightSpec;

#[derive(Clone, Debug)]
pub struct HoldoutResidual {
    /// `Σ_i ‖X^(i)_final[last] - y_i‖₂` after aligning the held-out run.
    pub residual: f64,
    pub full: EmbeddingResult,
    pub held_out: EmbeddingResult,
    pub oos: OosResult,
    /// The out-of-sample point mapped into the full embedding's frame.
    pub aligned_y: DenseMatrix,
}

/// The problem restricted to the first `k` objects.
pub fn leading_objects(problem: &OmnibusProblem, k: usize) -> Result<OmnibusProblem> {
    if k < 2 || k > problem.n() {
        return Err(JofcError::InvalidInput(format!(
            "cannot keep {k} of {} objects",
            problem.n()
        )));
    }
    let modalities = problem
        .modalities()
        .iter()
        .map(|delta| DissimilarityMatrix::new(delta.matrix().submatrix(0, 0, k, k)))
        .collect::<Result<Vec<_>>>()?;
    OmnibusProblem::new(modalities)
}

/// Dissimilarities from object `j` to objects `0..k` in every modality.
pub fn oos_row(problem: &OmnibusProblem, j: usize, k: usize) -> Result<OosDissimilarity> {
    OosDissimilarity::new(
        problem
            .modalities()
            .iter()
            .map(|delta| delta.matrix().row(j)[..k].to_vec())
            .collect(),
    )
}

/// Embeds all `n` objects, then the first `n - 1`, places the last object
/// out of sample into the second embedding, and measures how far that lands
/// from the last object's in-sample position.
///
/// The two in-sample runs are only determined up to rotation, so the
/// held-out run (and with it `y`) is first mapped onto the full run by the
/// least-squares rotation and translation over the `n - 1` shared objects.
pub fn holdout_residual(
    problem: &OmnibusProblem,
    w: f64,
    options: &SolveOptions,
    oos_options: &OosOptions,
    seed: u64,
) -> Result<HoldoutResidual> {
    let (m, n) = (problem.m(), problem.n());
    if n < 3 {
        return Err(JofcError::InvalidInput("hold-out needs at least 3 objects".into()));
    }
    let spec = WeightSpec::uniform(w);
    let full = fjofc_embed(problem, &spec, options)?;
    let reduced = leading_objects(problem, n - 1)?;
    let held_out = fjofc_embed(&reduced, &spec, options)?;
    let deltas = oos_row(problem, n - 1, n - 1)?;
    let oos = oos_embed(&held_out.config, &deltas, w, oos_options, seed)?;

    let shared = Configuration::from_blocks(
        &(0..m)
            .map(|i| full.config.block_matrix(i).row_block(0, n - 1))
            .collect::<Vec<_>>(),
    )?;
    let source = held_out.config.stacked();
    let target = shared.stacked();
    let rotation = procrustes_rotation(source, target)?;
    let (src_mean, tgt_mean) = (source.column_means(), target.column_means());
    let d = source.cols();
    let centered = DenseMatrix::from_fn(m, d, |i, t| oos.y[(i, t)] - src_mean[t]);
    let rotated = centered.matmul(&rotation)?;
    let aligned_y = DenseMatrix::from_fn(m, d, |i, t| rotated[(i, t)] + tgt_mean[t]);

    let residual = (0..m)
        .map(|i| row_distance(full.config.point(i, n - 1), aligned_y.row(i)))
        .sum();
    Ok(HoldoutResidual {
        residual,
        full,
        held_out,
        oos,
        aligned_y,
    })
}
