//! Out-of-sample embedding of one new object, seen in all `m` modalities,
//! into a frozen configuration.
//!
//! Only uniform weights are supported: unit weight between the new point and
//! the in-sample points of its own modality, `w` between its `m` copies.

use crate::error::{JofcError, Result};
use crate::guttman::dense_b_matrix;
use crate::matrix::{pseudoinverse_oracle, row_distance, squared_distance, DenseMatrix};
use crate::problem::Configuration;
use crate::rng::SeededRng;
use crate::stress::pair_count;
use crate::weights::laplacian;

/// Dissimilarities from the new object to the `n` in-sample objects, one
/// vector per modality.
#[derive(Clone, Debug, PartialEq)]
pub struct OosDissimilarity {
    deltas: Vec<Vec<f64>>,
}

impl OosDissimilarity {
    pub fn new(deltas: Vec<Vec<f64>>) -> Result<Self> {
        let n = deltas
            .first()
            .map(Vec::len)
            .ok_or_else(|| JofcError::InvalidInput("no out-of-sample dissimilarities".into()))?;
        for (i, v) in deltas.iter().enumerate() {
            if v.len() != n {
                return Err(JofcError::Shape(format!(
                    "modality {i} has {} out-of-sample dissimilarities, expected {n}",
                    v.len()
                )));
            }
            if let Some(j) = v.iter().position(|x| !x.is_finite() || *x < 0.0) {
                return Err(JofcError::InvalidInput(format!(
                    "out-of-sample dissimilarity {} at modality {i}, object {j}",
                    v[j]
                )));
            }
        }
        Ok(Self { deltas })
    }

    pub fn m(&self) -> usize {
        self.deltas.len()
    }

    pub fn n(&self) -> usize {
        self.deltas[0].len()
    }

    pub fn modality(&self, i: usize) -> &[f64] {
        &self.deltas[i]
    }
}

#[derive(Clone, Debug)]
pub struct OosOptions {
    /// Stop once the stress decrease falls below `eps` times the number of
    /// residual terms, `m·n + C(m, 2)`.
    pub eps: f64,
    pub max_iterations: usize,
}

impl Default for OosOptions {
    fn default() -> Self {
        Self {
            eps: 1e-6,
            max_iterations: 1000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct OosResult {
    /// m×d; row `i` is the copy of the new object in modality `i`.
    pub y: DenseMatrix,
    /// Stress of the initial point followed by one entry per step.
    pub stress_trace: Vec<f64>,
    pub iterations: usize,
}

fn check(y: &DenseMatrix, x: &Configuration, deltas: &OosDissimilarity, w: f64) -> Result<()> {
    if deltas.m() != x.m() || deltas.n() != x.n() {
        return Err(JofcError::Shape(format!(
            "out-of-sample data is {} x {}, configuration is {} x {}",
            deltas.m(),
            deltas.n(),
            x.m(),
            x.n()
        )));
    }
    if y.rows() != x.m() || y.cols() != x.d() {
        return Err(JofcError::Shape(format!(
            "out-of-sample point is {}x{}, expected {}x{}",
            y.rows(),
            y.cols(),
            x.m(),
            x.d()
        )));
    }
    if !(w.is_finite() && w > 0.0) {
        return Err(JofcError::InvalidWeights(format!("w must be positive, got {w}")));
    }
    Ok(())
}

/// `Σ_i Σ_j (δ_i(j) - d(X^(i)_j, y_i))² + w Σ_{i<k} d(y_i, y_k)²`.
pub fn oos_stress(y: &DenseMatrix, x: &Configuration, deltas: &OosDissimilarity, w: f64) -> Result<f64> {
    check(y, x, deltas, w)?;
    let (m, n) = (x.m(), x.n());
    let mut total = 0.0;
    for i in 0..m {
        let yi = y.row(i);
        for (j, &target) in deltas.modality(i).iter().enumerate().take(n) {
            let r = target - row_distance(x.point(i, j), yi);
            total += r * r;
        }
    }
    for i in 0..m {
        for k in (i + 1)..m {
            total += w * squared_distance(y.row(i), y.row(k));
        }
    }
    Ok(total)
}

/// Gradient of [`oos_stress`] with respect to `y` (away from zero distances).
pub fn oos_stress_gradient(y: &DenseMatrix, x: &Configuration, deltas: &OosDissimilarity, w: f64) -> Result<DenseMatrix> {
    check(y, x, deltas, w)?;
    let (m, n, d) = (x.m(), x.n(), x.d());
    let total: Vec<f64> = (0..d).map(|t| (0..m).map(|k| y[(k, t)]).sum()).collect();
    let mut grad = DenseMatrix::zeros(m, d);
    for i in 0..m {
        let yi = y.row(i).to_vec();
        for j in 0..n {
            let xj = x.point(i, j);
            let dist = row_distance(xj, &yi);
            let ratio = if dist > 0.0 { deltas.modality(i)[j] / dist } else { 0.0 };
            for t in 0..d {
                grad[(i, t)] += 2.0 * (1.0 - ratio) * (yi[t] - xj[t]);
            }
        }
        for t in 0..d {
            grad[(i, t)] += 2.0 * w * (m as f64 * yi[t] - total[t]);
        }
    }
    Ok(grad)
}

/// Guttman step using the closed form of `L₂₂†`; linear in `n`.
pub fn oos_step_fast(y: &DenseMatrix, x: &Configuration, deltas: &OosDissimilarity, w: f64) -> Result<DenseMatrix> {
    check(y, x, deltas, w)?;
    let (m, n, d) = (x.m(), x.n(), x.d());
    let (nf, mf) = (n as f64, m as f64);
    let diag = 1.0 / (nf + mf * w);
    let shared = w / (nf * (nf + mf * w));

    let mut xi = DenseMatrix::zeros(m, d);
    let mut psi = vec![0.0; m];
    for j in 0..m {
        let yj = y.row(j);
        let delta = deltas.modality(j);
        let acc = xi.row_mut(j);
        for (k, &target) in delta.iter().enumerate() {
            let xk = x.point(j, k);
            let dist = row_distance(xk, yj);
            let ratio = if dist > 0.0 { target / dist } else { 0.0 };
            psi[j] += ratio;
            for (a, v) in acc.iter_mut().zip(xk) {
                *a += (1.0 - ratio) * v;
            }
        }
    }
    let mut xi_sum = vec![0.0; d];
    let mut psi_y_sum = vec![0.0; d];
    for k in 0..m {
        for t in 0..d {
            xi_sum[t] += xi[(k, t)];
            psi_y_sum[t] += psi[k] * y[(k, t)];
        }
    }
    let next = DenseMatrix::from_fn(m, d, |j, t| {
        diag * xi[(j, t)] + shared * xi_sum[t] + diag * psi[j] * y[(j, t)] + shared * psi_y_sum[t]
    });
    if next.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(JofcError::NonFinite("out-of-sample update".into()));
    }
    Ok(next)
}

/// Guttman step through the dense `(mn + m)`-order weight, Laplacian and B
/// matrices, with `L₂₂†` from the eigendecomposition oracle.
pub fn oos_step_reference(
    y: &DenseMatrix,
    x: &Configuration,
    deltas: &OosDissimilarity,
    w: f64,
    cap: usize,
) -> Result<DenseMatrix> {
    check(y, x, deltas, w)?;
    let (m, n, d) = (x.m(), x.n(), x.d());
    let (inner, order) = (m * n, m * n + m);
    if order > cap {
        return Err(JofcError::SizeCap { size: order, cap });
    }
    let mut weights = DenseMatrix::zeros(order, order);
    let mut omnibus = DenseMatrix::zeros(order, order);
    for i in 0..m {
        let yi = inner + i;
        for j in 0..n {
            let xj = i * n + j;
            weights[(xj, yi)] = 1.0;
            weights[(yi, xj)] = 1.0;
            omnibus[(xj, yi)] = deltas.modality(i)[j];
            omnibus[(yi, xj)] = deltas.modality(i)[j];
        }
        for k in 0..m {
            if k != i {
                weights[(yi, inner + k)] = w;
            }
        }
    }
    let mut stacked = DenseMatrix::zeros(order, d);
    stacked.as_mut_slice()[..inner * d].copy_from_slice(x.stacked().as_slice());
    stacked.as_mut_slice()[inner * d..].copy_from_slice(y.as_slice());

    let l = laplacian(&weights);
    let b = dense_b_matrix(&stacked, &omnibus, &weights)?;
    let l12 = l.submatrix(0, inner, inner, m);
    let l22 = l.submatrix(inner, inner, m, m);
    let b12 = b.submatrix(0, inner, inner, m);
    let b22 = b.submatrix(inner, inner, m, m);

    let rhs = b12
        .transpose()
        .sub(&l12.transpose())?
        .matmul(x.stacked())?
        .add(&b22.matmul(y)?)?;
    pseudoinverse_oracle(&l22)?.matmul(&rhs)
}

/// Seeded random start: independent centered Gaussian rows scaled so their
/// expected norm matches the RMS row norm of `x`.
pub fn oos_initial_point(x: &Configuration, seed: u64) -> DenseMatrix {
    let pts = x.stacked();
    let rms = (pts.as_slice().iter().map(|v| v * v).sum::<f64>() / pts.rows().max(1) as f64).sqrt();
    let scale = rms / (x.d() as f64).sqrt();
    let mut rng = SeededRng::new(seed);
    DenseMatrix::from_fn(x.m(), x.d(), |_, _| scale * rng.normal())
}

/// Embeds one new object by iterating [`oos_step_fast`] from a seeded start.
pub fn oos_embed(
    x: &Configuration,
    deltas: &OosDissimilarity,
    w: f64,
    options: &OosOptions,
    seed: u64,
) -> Result<OosResult> {
    oos_embed_from(x, deltas, w, options, oos_initial_point(x, seed))
}

/// As [`oos_embed`], from a given starting point.
pub fn oos_embed_from(
    x: &Configuration,
    deltas: &OosDissimilarity,
    w: f64,
    options: &OosOptions,
    start: DenseMatrix,
) -> Result<OosResult> {
    if !(options.eps > 0.0) {
        return Err(JofcError::InvalidInput(format!(
            "eps must be positive, got {}",
            options.eps
        )));
    }
    let threshold = options.eps * ((x.m() * x.n()) as f64 + pair_count(x.m()));
    let mut y = start;
    let mut stress = oos_stress(&y, x, deltas, w)?;
    let mut stress_trace = vec![stress];
    let mut iterations = 0;
    while iterations < options.max_iterations {
        let next = oos_step_fast(&y, x, deltas, w)?;
        let next_stress = oos_stress(&next, x, deltas, w)?;
        iterations += 1;
        stress_trace.push(next_stress);
        let decrease = stress - next_stress;
        y = next;
        stress = next_stress;
        if decrease < threshold {
            break;
        }
    }
    Ok(OosResult {
        y,
        stress_trace,
        iterations,
    })
}
