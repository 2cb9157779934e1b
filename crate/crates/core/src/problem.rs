use crate::error::{JofcError, Result};
use crate::matrix::{DenseMatrix, DissimilarityMatrix};

/// `m` dissimilarity matrices over the same `n` objects.
///
/// The omnibus matrix this stands for has the modalities on its diagonal
/// blocks, zero on the matched cross-modality pairs, and missing entries
/// everywhere else. Only the diagonal blocks are stored.
#[derive(Clone, Debug, PartialEq)]
pub struct OmnibusProblem {
    modalities: Vec<DissimilarityMatrix>,
    n: usize,
}

impl OmnibusProblem {
    pub fn new(modalities: Vec<DissimilarityMatrix>) -> Result<Self> {
        let n = modalities
            .first()
            .map(DissimilarityMatrix::n)
            .ok_or_else(|| JofcError::InvalidInput("no modalities supplied".into()))?;
        if n < 2 {
            return Err(JofcError::InvalidInput(format!(
                "need at least two objects, got {n}"
            )));
        }
        if let Some((i, d)) = modalities.iter().enumerate().find(|(_, d)| d.n() != n) {
            return Err(JofcError::Shape(format!(
                "modality {i} has {} objects, modality 0 has {n}",
                d.n()
            )));
        }
        Ok(Self { modalities, n })
    }

    /// Number of objects.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of modalities.
    pub fn m(&self) -> usize {
        self.modalities.len()
    }

    pub fn modality(&self, i: usize) -> &DissimilarityMatrix {
        &self.modalities[i]
    }

    pub fn modalities(&self) -> &[DissimilarityMatrix] {
        &self.modalities
    }

    /// Copy with every modality scaled to unit Frobenius norm. All-zero
    /// modalities are left as they are.
    pub fn normalized(&self) -> Self {
        let modalities = self
            .modalities
            .iter()
            .map(|d| {
                let norm = d.matrix().frobenius_norm();
                if norm > 0.0 {
                    d.scale(1.0 / norm)
                } else {
                    d.clone()
                }
            })
            .collect();
        Self {
            modalities,
            n: self.n,
        }
    }

    /// Entrywise mean of the modalities.
    pub fn average(&self) -> DissimilarityMatrix {
        let m = self.m() as f64;
        let mut acc = DenseMatrix::zeros(self.n, self.n);
        for d in &self.modalities {
            for (a, v) in acc.as_mut_slice().iter_mut().zip(d.matrix().as_slice()) {
                *a += v / m;
            }
        }
        DissimilarityMatrix::new(acc).expect("mean of dissimilarities is a dissimilarity")
    }

    /// Dense mn×mn omnibus with missing entries stored as 0; pair it with the
    /// dense weight matrix, which is zero there.
    pub fn dense_omnibus(&self, cap: usize) -> Result<DenseMatrix> {
        let (m, n) = (self.m(), self.n);
        if m * n > cap {
            return Err(JofcError::SizeCap { size: m * n, cap });
        }
        Ok(DenseMatrix::from_fn(m * n, m * n, |r, c| {
            if r / n == c / n {
                self.modalities[r / n].get(r % n, c % n)
            } else {
                0.0
            }
        }))
    }
}

/// Stacked mn×d embedding; block `i` holds the n points of modality `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct Configuration {
    points: DenseMatrix,
    m: usize,
    n: usize,
}

impl Configuration {
    pub fn new(points: DenseMatrix, m: usize, n: usize) -> Result<Self> {
        if points.rows() != m * n {
            return Err(JofcError::Shape(format!(
                "configuration has {} rows, expected {m} x {n}",
                points.rows()
            )));
        }
        if points.cols() == 0 {
            return Err(JofcError::Shape("embedding dimension is zero".into()));
        }
        Ok(Self { points, m, n })
    }

    /// Stacks per-modality n×d blocks.
    pub fn from_blocks(blocks: &[DenseMatrix]) -> Result<Self> {
        let first = blocks
            .first()
            .ok_or_else(|| JofcError::Shape("no blocks".into()))?;
        let (n, d) = (first.rows(), first.cols());
        if blocks.iter().any(|b| b.rows() != n || b.cols() != d) {
            return Err(JofcError::Shape("blocks differ in shape".into()));
        }
        let data: Vec<f64> = blocks.iter().flat_map(|b| b.as_slice().iter().copied()).collect();
        Self::new(DenseMatrix::new(blocks.len() * n, d, data)?, blocks.len(), n)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.points.cols()
    }

    pub fn stacked(&self) -> &DenseMatrix {
        &self.points
    }

    pub fn into_stacked(self) -> DenseMatrix {
        self.points
    }

    /// Row-major n×d slice of modality `i`.
    pub fn block(&self, i: usize) -> &[f64] {
        let len = self.n * self.d();
        &self.points.as_slice()[i * len..(i + 1) * len]
    }

    pub fn block_mut(&mut self, i: usize) -> &mut [f64] {
        let len = self.n * self.d();
        &mut self.points.as_mut_slice()[i * len..(i + 1) * len]
    }

    pub fn block_matrix(&self, i: usize) -> DenseMatrix {
        self.points.row_block(i * self.n, self.n)
    }

    /// Embedded copy of object `object` in modality `modality`.
    pub fn point(&self, modality: usize, object: usize) -> &[f64] {
        self.points.row(modality * self.n + object)
    }

    /// Largest absolute column mean over the stacked configuration.
    pub fn max_abs_column_mean(&self) -> f64 {
        self.points
            .column_means()
            .into_iter()
            .fold(0.0, |a, v| a.max(v.abs()))
    }

    pub(crate) fn check_against(&self, problem: &OmnibusProblem) -> Result<()> {
        if self.m != problem.m() || self.n != problem.n() {
            return Err(JofcError::Shape(format!(
                "configuration is {} x {} but the problem has {} modalities of {} objects",
                self.m,
                self.n,
                problem.m(),
                problem.n()
            )));
        }
        Ok(())
    }
}
