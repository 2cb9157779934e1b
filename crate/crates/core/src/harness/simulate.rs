//! Synthetic matched and anomaly settings.
//!
//! A latent `Y ~ N(5·1, I)` of shape n×dim is drawn, then each modality is
//! `Y + E_i` with `E_i` entrywise `Uniform(-z/50, z/50)`, `z = max(Y) - min(Y)`.
//! In the anomaly setting the first `n_anom` rows of the last modality are
//! redrawn from `N(8·1, 2I)`.
//!
//! Draw order is `Y`, `E_1 … E_m`, then anomaly rows, so `n_anom = 0`
//! reproduces the matched setting bit for bit.

use crate::error::{JofcError, Result};
use crate::matrix::{euclidean_distance_matrix, DenseMatrix};
use crate::problem::OmnibusProblem;
use crate::rng::SeededRng;

const LATENT_MEAN: f64 = 5.0;
const ANOMALY_MEAN: f64 = 8.0;
const ANOMALY_VARIANCE: f64 = 2.0;
const JITTER_FRACTION: f64 = 1.0 / 50.0;

#[derive(Clone, Debug)]
pub struct Simulated {
    pub problem: OmnibusProblem,
    /// Ground-truth object label of each object (`0..n`).
    pub labels: Vec<usize>,
    /// Indices of anomalous objects (empty in the matched setting).
    pub anomalies: Vec<usize>,
    /// Per-modality point clouds the dissimilarities were computed from.
    pub points: Vec<DenseMatrix>,
}

/// Matched setting: every modality is a small jitter of one latent cloud.
pub fn generate_matched(n: usize, m: usize, dim: usize, seed: u64) -> Result<Simulated> {
    generate_anomaly(n, m, 0, dim, seed)
}

/// Anomaly setting: as [`generate_matched`], but the first `n_anom` objects
/// of the last modality are replaced by draws from `N(8·1, 2I)`.
pub fn generate_anomaly(n: usize, m: usize, n_anom: usize, dim: usize, seed: u64) -> Result<Simulated> {
    if n < 2 || m == 0 || dim == 0 {
        return Err(JofcError::InvalidInput(format!(
            "generator needs n >= 2, m >= 1, dim >= 1 (got n={n}, m={m}, dim={dim})"
        )));
    }
    if n_anom > n {
        return Err(JofcError::InvalidInput(format!(
            "{n_anom} anomalies requested for {n} objects"
        )));
    }
    let mut rng = SeededRng::new(seed);
    let latent = DenseMatrix::from_fn(n, dim, |_, _| LATENT_MEAN + rng.normal());
    let (lo, hi) = latent
        .as_slice()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let half_width = (hi - lo) * JITTER_FRACTION;

    let mut points: Vec<DenseMatrix> = (0..m)
        .map(|_| DenseMatrix::from_fn(n, dim, |r, c| latent[(r, c)] + rng.uniform_in(-half_width, half_width)))
        .collect();
    let last = points.last_mut().expect("m >= 1");
    let sd = ANOMALY_VARIANCE.sqrt();
    for r in 0..n_anom {
        for v in last.row_mut(r) {
            *v = ANOMALY_MEAN + sd * rng.normal();
        }
    }

    let modalities = points.iter().map(euclidean_distance_matrix).collect();
    Ok(Simulated {
        problem: OmnibusProblem::new(modalities)?,
        labels: (0..n).collect(),
        anomalies: (0..n_anom).collect(),
        points,
    })
}
