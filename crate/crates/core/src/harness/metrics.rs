//! Clustering and embedding-quality metrics.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{JofcError, Result};
use crate::matrix::{row_distance, squared_distance, DenseMatrix};
use crate::problem::Configuration;
use crate::rng::SeededRng;
use crate::solver::EmbeddingResult;

const KMEANS_MAX_ITERATIONS: usize = 100;

#[derive(Clone, Debug)]
pub struct KMeans {
    pub labels: Vec<usize>,
    pub centers: DenseMatrix,
    /// Within-cluster sum of squares after seeding and after each Lloyd step.
    pub objective_trace: Vec<f64>,
}

/// Lloyd's algorithm from k-means++ seeding, until the assignment stops
/// changing or 100 iterations. An empty cluster is reseeded with the point
/// farthest from its current center.
pub fn kmeans(points: &DenseMatrix, k: usize, seed: u64) -> Result<KMeans> {
    let count = points.rows();
    if k == 0 || k > count {
        return Err(JofcError::InvalidInput(format!(
            "k = {k} clusters requested for {count} points"
        )));
    }
    let d = points.cols();
    let mut rng = SeededRng::new(seed);
    let mut centers = DenseMatrix::zeros(k, d);

    // k-means++ seeding.
    let first = rng.index(count);
    centers.row_mut(0).copy_from_slice(points.row(first));
    let mut nearest: Vec<f64> = (0..count).map(|i| squared_distance(points.row(i), points.row(first))).collect();
    let mut chosen = vec![false; count];
    chosen[first] = true;
    for c in 1..k {
        let total: f64 = nearest.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.uniform() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &w) in nearest.iter().enumerate() {
                acc += w;
                if w > 0.0 && acc > target {
                    pick = Some(i);
                    break;
                }
            }
            // Rounding can leave `target` past the final sum.
            pick.unwrap_or_else(|| nearest.iter().rposition(|&w| w > 0.0).expect("total > 0"))
        } else {
            // All remaining points coincide with a center: take any unused one.
            let unused: Vec<usize> = (0..count).filter(|&i| !chosen[i]).collect();
            unused[rng.index(unused.len())]
        };
        chosen[pick] = true;
        centers.row_mut(c).copy_from_slice(points.row(pick));
        for (i, near) in nearest.iter_mut().enumerate() {
            *near = near.min(squared_distance(points.row(i), points.row(pick)));
        }
    }

    let mut labels = vec![usize::MAX; count];
    let mut objective_trace = Vec::new();
    for iteration in 0..=KMEANS_MAX_ITERATIONS {
        let mut changed = false;
        let mut objective = 0.0;
        for (i, label) in labels.iter_mut().enumerate() {
            let (best, dist) = nearest_center(points.row(i), &centers);
            objective += dist;
            if *label != best {
                *label = best;
                changed = true;
            }
        }
        objective_trace.push(objective);
        if !changed || iteration == KMEANS_MAX_ITERATIONS {
            break;
        }

        let mut sums = DenseMatrix::zeros(k, d);
        let mut sizes = vec![0usize; k];
        for (i, &label) in labels.iter().enumerate() {
            sizes[label] += 1;
            for (s, v) in sums.row_mut(label).iter_mut().zip(points.row(i)) {
                *s += v;
            }
        }
        for c in 0..k {
            if sizes[c] > 0 {
                let inv = 1.0 / sizes[c] as f64;
                for (dst, s) in centers.row_mut(c).iter_mut().zip(sums.row(c)) {
                    *dst = s * inv;
                }
            }
        }
        for c in 0..k {
            if sizes[c] == 0 {
                let far = (0..count)
                    .filter(|&i| sizes[labels[i]] > 1)
                    .max_by(|&a, &b| {
                        let da = squared_distance(points.row(a), centers.row(labels[a]));
                        let db = squared_distance(points.row(b), centers.row(labels[b]));
                        da.total_cmp(&db)
                    });
                if let Some(i) = far {
                    sizes[labels[i]] -= 1;
                    sizes[c] = 1;
                    labels[i] = c;
                    centers.row_mut(c).copy_from_slice(points.row(i));
                }
            }
        }
    }
    Ok(KMeans {
        labels,
        centers,
        objective_trace,
    })
}

fn nearest_center(p: &[f64], centers: &DenseMatrix) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for c in 0..centers.rows() {
        let dist = squared_distance(p, centers.row(c));
        if dist < best.1 {
            best = (c, dist);
        }
    }
    best
}

/// Adjusted Rand index under the permutation model. Returns 1 when the
/// index is undefined because both labelings are trivial in the same way.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(JofcError::Shape(format!(
            "labelings have lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    let pairs = |c: usize| (c * c.saturating_sub(1)) as f64 / 2.0;
    let mut cells: HashMap<(usize, usize), usize> = HashMap::new();
    let mut rows: HashMap<usize, usize> = HashMap::new();
    let mut cols: HashMap<usize, usize> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *cells.entry((x, y)).or_default() += 1;
        *rows.entry(x).or_default() += 1;
        *cols.entry(y).or_default() += 1;
    }
    let index: f64 = cells.values().map(|&c| pairs(c)).sum();
    let sum_a: f64 = rows.values().map(|&c| pairs(c)).sum();
    let sum_b: f64 = cols.values().map(|&c| pairs(c)).sum();
    let total = pairs(a.len());
    let expected = if total > 0.0 { sum_a * sum_b / total } else { 0.0 };
    let max = 0.5 * (sum_a + sum_b);
    if max == expected {
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}

/// Ground-truth labels for embedded rows: row `i·n + j` belongs to object `j`.
pub fn object_labels(m: usize, n: usize) -> Vec<usize> {
    (0..m * n).map(|r| r % n).collect()
}

/// k-means with one cluster per distinct label, scored against `labels`
/// (one label per object, shared by its `m` copies). Rows of objects in
/// `exclude` are clustered but left out of the score.
pub fn clustering_ari(config: &Configuration, labels: &[usize], exclude: &[usize], seed: u64) -> Result<f64> {
    let (m, n) = (config.m(), config.n());
    if labels.len() != n {
        return Err(JofcError::Shape(format!("{} labels for {n} objects", labels.len())));
    }
    let mut distinct = labels.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    let fit = kmeans(config.stacked(), distinct.len(), seed)?;
    let mut skip = vec![false; n];
    for &j in exclude {
        if j >= n {
            return Err(JofcError::InvalidInput(format!("object {j} out of range 0..{n}")));
        }
        skip[j] = true;
    }
    let (a, b): (Vec<usize>, Vec<usize>) = (0..m * n)
        .filter(|&r| !skip[r % n])
        .map(|r| (labels[r % n], fit.labels[r]))
        .unzip();
    adjusted_rand_index(&a, &b)
}

/// Mean pairwise distance among the `m` embedded copies of object `j`.
pub fn copy_spread(config: &Configuration, j: usize) -> f64 {
    let m = config.m();
    if m < 2 {
        return 0.0;
    }
    let mut total = 0.0;
    for a in 0..m {
        for b in (a + 1)..m {
            total += row_distance(config.point(a, j), config.point(b, j));
        }
    }
    total / (m * (m - 1) / 2) as f64
}

/// Mean copy spread of the anomalous objects divided by that of the rest.
///
/// A zero denominator gives `+∞` (with a warning) for a nonzero numerator
/// and 1 when both vanish.
pub fn confusion_ratio(config: &Configuration, anomalies: &[usize]) -> Result<f64> {
    let n = config.n();
    let mut anomalous = vec![false; n];
    for &j in anomalies {
        if j >= n {
            return Err(JofcError::InvalidInput(format!("anomaly index {j} out of range 0..{n}")));
        }
        anomalous[j] = true;
    }
    let count = anomalous.iter().filter(|&&a| a).count();
    if count == 0 || count == n {
        return Err(JofcError::InvalidInput(
            "confusion ratio needs both anomalous and non-anomalous objects".into(),
        ));
    }
    let (mut num, mut den) = (0.0, 0.0);
    for (j, &anom) in anomalous.iter().enumerate() {
        let s = copy_spread(config, j);
        if anom {
            num += s;
        } else {
            den += s;
        }
    }
    let num = num / count as f64;
    let den = den / (n - count) as f64;
    Ok(if den > 0.0 {
        num / den
    } else if num > 0.0 {
        log::warn!("non-anomalous copies coincide exactly; confusion ratio is infinite");
        f64::INFINITY
    } else {
        1.0
    })
}

/// `‖X_final - X_k‖_F / ‖X_final‖_F` from a run that kept its iterates.
/// `k` counts Guttman steps (0 is the initial configuration).
pub fn relative_error_trace(result: &EmbeddingResult, k: usize) -> Result<f64> {
    let iterates = result
        .iterates
        .as_ref()
        .ok_or_else(|| JofcError::InvalidInput("run did not keep its iterates".into()))?;
    if k >= iterates.len() {
        return Err(JofcError::InvalidInput(format!(
            "iterate {k} requested, run has {} steps",
            iterates.len() - 1
        )));
    }
    let last = iterates.last().expect("initial configuration kept").stacked();
    let norm = last.frobenius_norm();
    let diff = last.sub(iterates[k].stacked())?.frobenius_norm();
    Ok(if norm > 0.0 { diff / norm } else { diff })
}

/// Summary written by `embed` and `eval`.
#[derive(Clone, Debug, Default, Serialize)]
pub struct MetricsReport {
    pub final_normalized_stress: Option<f64>,
    pub ari: Option<f64>,
    /// ARI over the non-anomalous objects only.
    pub ari_non_anomalous: Option<f64>,
    pub confusion_ratio: Option<f64>,
    pub iterations: Option<usize>,
    pub step_seconds: Vec<f64>,
}

impl MetricsReport {
    pub fn from_result(result: &EmbeddingResult) -> Self {
        Self {
            final_normalized_stress: Some(result.final_normalized_stress()),
            iterations: Some(result.iterations),
            step_seconds: result.step_times.iter().map(|t| t.as_secs_f64()).collect(),
            ..Self::default()
        }
    }
}
