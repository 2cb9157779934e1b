//! Structured JOFC weight families and the closed-form Laplacian
//! pseudoinverse they admit.
//!
//! For an omnibus weight matrix whose diagonal blocks are `w_ii (J_n - I_n)`
//! and whose off-diagonal blocks are `w_ij I_n`, the combinatorial Laplacian
//! factors as `L = 𝒲 ⊗ I_n - diag(w_ii) ⊗ J_n`, with `𝒲` the m×m matrix
//! returned by [`script_w`]. Its pseudoinverse is again of the form
//! `V ⊗ I_n + Z ⊗ J_n`, so only two m×m factors are ever stored.

use serde::{Deserialize, Serialize};

use crate::error::{JofcError, Result};
use crate::matrix::DenseMatrix;

/// Default cap on the order of matrices the dense test/reference paths may
/// materialize.
pub const DEFAULT_DENSE_CAP: usize = 4096;

/// Weight family for the omnibus raw-stress criterion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightSpec {
    /// Unit within-modality weights, `w` on every matched cross-modality pair.
    Uniform { w: f64 },
    /// Arbitrary symmetric m×m table; the diagonal holds the
    /// within-modality weights, off-diagonal entries the matched-pair weights.
    GeneralSymmetric { matrix: Vec<Vec<f64>> },
    /// Per-modality weights `w_ii`; matched pairs get `w_ii * w_jj` and the
    /// within-modality blocks `c * w_ii`.
    Product { within: Vec<f64>, c: f64 },
}

impl WeightSpec {
    pub fn uniform(w: f64) -> Self {
        WeightSpec::Uniform { w }
    }

    /// Number of modalities the spec is tied to, if any.
    pub fn modality_count(&self) -> Option<usize> {
        match self {
            WeightSpec::Uniform { .. } => None,
            WeightSpec::GeneralSymmetric { matrix } => Some(matrix.len()),
            WeightSpec::Product { within, .. } => Some(within.len()),
        }
    }

    /// Checks positivity, symmetry and agreement with `m` modalities.
    pub fn validate(&self, m: usize) -> Result<()> {
        if m == 0 {
            return Err(JofcError::InvalidInput("no modalities".into()));
        }
        if let Some(k) = self.modality_count() {
            if k != m {
                return Err(JofcError::InvalidWeights(format!(
                    "weights describe {k} modalities but the problem has {m}"
                )));
            }
        }
        let positive = |v: f64, what: &str| -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(JofcError::InvalidWeights(format!(
                    "{what} must be positive and finite, got {v}"
                )))
            }
        };
        match self {
            WeightSpec::Uniform { w } => positive(*w, "w"),
            WeightSpec::GeneralSymmetric { matrix } => {
                for (i, row) in matrix.iter().enumerate() {
                    if row.len() != m {
                        return Err(JofcError::InvalidWeights(format!(
                            "row {i} of the weight table has {} entries, expected {m}",
                            row.len()
                        )));
                    }
                    for (j, &v) in row.iter().enumerate() {
                        positive(v, &format!("w[{i}][{j}]"))?;
                    }
                }
                for i in 0..m {
                    for j in 0..i {
                        if matrix[i][j] != matrix[j][i] {
                            return Err(JofcError::InvalidWeights(format!(
                                "weight table is not symmetric at ({i}, {j})"
                            )));
                        }
                    }
                }
                Ok(())
            }
            WeightSpec::Product { within, c } => {
                positive(*c, "c")?;
                for (i, &v) in within.iter().enumerate() {
                    positive(v, &format!("w[{i}]"))?;
                }
                Ok(())
            }
        }
    }

    /// Weight on the fidelity pairs of modality `i`.
    pub fn within(&self, i: usize) -> f64 {
        match self {
            WeightSpec::Uniform { .. } => 1.0,
            WeightSpec::GeneralSymmetric { matrix } => matrix[i][i],
            WeightSpec::Product { within, c } => c * within[i],
        }
    }

    /// Weight on the matched pairs between modalities `i != j`.
    pub fn cross(&self, i: usize, j: usize) -> f64 {
        match self {
            WeightSpec::Uniform { w } => *w,
            WeightSpec::GeneralSymmetric { matrix } => matrix[i][j],
            WeightSpec::Product { within, .. } => within[i] * within[j],
        }
    }
}

fn check_sizes(spec: &WeightSpec, m: usize, n: usize) -> Result<()> {
    if n < 2 {
        return Err(JofcError::InvalidInput(format!(
            "need at least two objects, got {n}"
        )));
    }
    spec.validate(m)
}

/// The m×m matrix 𝒲: diagonal `n w_ii + Σ_{j≠i} w_ij`, off-diagonal `-w_ij`.
pub fn script_w(spec: &WeightSpec, m: usize, n: usize) -> Result<DenseMatrix> {
    check_sizes(spec, m, n)?;
    Ok(DenseMatrix::from_fn(m, m, |i, j| {
        if i == j {
            n as f64 * spec.within(i) + (0..m).filter(|&k| k != i).map(|k| spec.cross(i, k)).sum::<f64>()
        } else {
            -spec.cross(i, j)
        }
    }))
}

/// 𝒲⁻¹, in closed form for the uniform and product families.
pub fn script_w_inverse(spec: &WeightSpec, m: usize, n: usize) -> Result<DenseMatrix> {
    check_sizes(spec, m, n)?;
    let nf = n as f64;
    match spec {
        WeightSpec::Uniform { w } => {
            let denom = nf * (nf + m as f64 * w);
            Ok(DenseMatrix::from_fn(m, m, |i, j| {
                if i == j {
                    (nf + w) / denom
                } else {
                    w / denom
                }
            }))
        }
        WeightSpec::Product { within, c } => {
            let cn = c * nf;
            let total = cn + within.iter().sum::<f64>();
            let shared = 1.0 / (cn * total);
            Ok(DenseMatrix::from_fn(m, m, |i, j| {
                if i == j {
                    1.0 / (within[i] * total) + shared
                } else {
                    shared
                }
            }))
        }
        WeightSpec::GeneralSymmetric { .. } => script_w(spec, m, n)?.inverse(),
    }
}

/// 𝒲 together with its inverse.
#[derive(Clone, Debug)]
pub struct ScriptW {
    matrix: DenseMatrix,
    inverse: DenseMatrix,
}

impl ScriptW {
    pub fn new(spec: &WeightSpec, m: usize, n: usize) -> Result<Self> {
        Ok(Self {
            matrix: script_w(spec, m, n)?,
            inverse: script_w_inverse(spec, m, n)?,
        })
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    pub fn inverse(&self) -> &DenseMatrix {
        &self.inverse
    }
}

/// Operator `V ⊗ I_n + Z ⊗ J_n` stored through its two m×m factors.
#[derive(Clone, Debug, PartialEq)]
pub struct KroneckerOperator {
    pub identity_factor: DenseMatrix,
    pub ones_factor: DenseMatrix,
    pub n: usize,
}

impl KroneckerOperator {
    /// Order of the operator, `m * n`.
    pub fn order(&self) -> usize {
        self.identity_factor.rows() * self.n
    }

    /// Dense mn×mn form. Test and reference paths only.
    pub fn materialize(&self, cap: usize) -> Result<DenseMatrix> {
        let order = self.order();
        if order > cap {
            return Err(JofcError::SizeCap { size: order, cap });
        }
        let n = self.n;
        Ok(DenseMatrix::from_fn(order, order, |r, c| {
            let (bi, bj) = (r / n, c / n);
            let diag = if r % n == c % n {
                self.identity_factor[(bi, bj)]
            } else {
                0.0
            };
            diag + self.ones_factor[(bi, bj)]
        }))
    }
}

/// Inverse of `A ⊗ I_n + B ⊗ J_n` as `A⁻¹ ⊗ I_n - (A + nB)⁻¹ B A⁻¹ ⊗ J_n`.
pub fn kronecker_sum_inverse(a: &DenseMatrix, b: &DenseMatrix, n: usize) -> Result<KroneckerOperator> {
    if !a.is_square() || a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(JofcError::Shape(format!(
            "Kronecker factors must be equal square matrices, got {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let a_inv = a.inverse()?;
    let shifted_inv = a.add(&b.scale(n as f64))?.inverse()?;
    let z = shifted_inv.matmul(b)?.matmul(&a_inv)?.scale(-1.0);
    Ok(KroneckerOperator {
        identity_factor: a_inv,
        ones_factor: z,
        n,
    })
}

/// Factors `(V, Z)` of the Laplacian pseudoinverse `L† = V ⊗ I_n + Z ⊗ J_n`.
///
/// `V = 𝒲⁻¹` and `Z = -(𝒲 + nE)⁻¹ E 𝒲⁻¹ - J_m/(mn)` with
/// `E = J_m/(mn) - diag(w_ii)`.
pub fn laplacian_pseudoinverse_factors(spec: &WeightSpec, m: usize, n: usize) -> Result<KroneckerOperator> {
    let sw = ScriptW::new(spec, m, n)?;
    let jm = DenseMatrix::ones(m, m).scale(1.0 / (m * n) as f64);
    let within: Vec<f64> = (0..m).map(|i| spec.within(i)).collect();
    let e = jm.sub(&DenseMatrix::diag(&within))?;
    let shifted_inv = sw.matrix().add(&e.scale(n as f64))?.inverse()?;
    let z = shifted_inv
        .matmul(&e)?
        .matmul(sw.inverse())?
        .scale(-1.0)
        .sub(&jm)?;
    Ok(KroneckerOperator {
        identity_factor: sw.inverse,
        ones_factor: z,
        n,
    })
}

/// Dense mn×mn omnibus weight matrix. Test and reference paths only.
pub fn dense_weight_matrix(spec: &WeightSpec, m: usize, n: usize, cap: usize) -> Result<DenseMatrix> {
    check_sizes(spec, m, n)?;
    let order = m * n;
    if order > cap {
        return Err(JofcError::SizeCap { size: order, cap });
    }
    Ok(DenseMatrix::from_fn(order, order, |r, c| {
        let (bi, bj) = (r / n, c / n);
        let same_object = r % n == c % n;
        if bi == bj {
            if same_object {
                0.0
            } else {
                spec.within(bi)
            }
        } else if same_object {
            spec.cross(bi, bj)
        } else {
            0.0
        }
    }))
}

/// Combinatorial Laplacian `D - W` of a symmetric weight matrix.
pub fn laplacian(w: &DenseMatrix) -> DenseMatrix {
    let sums = w.row_sums();
    let mut l = w.scale(-1.0);
    for (i, s) in sums.into_iter().enumerate() {
        l[(i, i)] += s;
    }
    l
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::pseudoinverse_oracle;

    #[test]
    fn script_w_uniform() {
        let w = script_w(&WeightSpec::uniform(1.0), 2, 3).unwrap();
        let expected = DenseMatrix::from_rows(&[vec![4.0, -1.0], vec![-1.0, 4.0]]).unwrap();
        assert_eq!(w, expected);
    }

    #[test]
    fn script_w_single_modality() {
        let w = script_w(&WeightSpec::uniform(1.0), 1, 5).unwrap();
        assert_eq!(w.as_slice(), &[5.0]);
        let inv = script_w_inverse(&WeightSpec::uniform(1.0), 1, 5).unwrap();
        assert!((inv[(0, 0)] - 0.2).abs() < 1e-15);
    }

    #[test]
    fn script_w_product() {
        let spec = WeightSpec::Product {
            within: vec![1.0, 2.0],
            c: 1.0,
        };
        let w = script_w(&spec, 2, 3).unwrap();
        assert_eq!(w.as_slice(), &[5.0, -2.0, -2.0, 8.0]);
    }

    #[test]
    fn uniform_inverse_closed_form() {
        let inv = script_w_inverse(&WeightSpec::uniform(1.0), 2, 3).unwrap();
        let expected = DenseMatrix::from_rows(&[
            vec![4.0 / 15.0, 1.0 / 15.0],
            vec![1.0 / 15.0, 4.0 / 15.0],
        ])
        .unwrap();
        assert!(inv.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn product_inverse_closed_form() {
        let spec = WeightSpec::Product {
            within: vec![1.0, 1.0],
            c: 1.0,
        };
        let inv = script_w_inverse(&spec, 2, 4).unwrap();
        assert!((inv[(0, 0)] - 5.0 / 24.0).abs() < 1e-15);
        assert!((inv[(0, 1)] - 1.0 / 24.0).abs() < 1e-15);
        let direct = script_w(&spec, 2, 4).unwrap().inverse().unwrap();
        assert!(inv.max_abs_diff(&direct) < 1e-12);
    }

    #[test]
    fn closed_forms_match_direct_inversion() {
        for m in [1, 2, 3, 5] {
            for n in [2, 4, 7] {
                for w in [0.1, 1.0, 10.0] {
                    let specs = [
                        WeightSpec::uniform(w),
                        WeightSpec::Product {
                            within: (0..m).map(|i| w * (1.0 + i as f64 * 0.5)).collect(),
                            c: 0.5 + w,
                        },
                    ];
                    for spec in specs {
                        let sw = ScriptW::new(&spec, m, n).unwrap();
                        let direct = sw.matrix().inverse().unwrap();
                        assert!(sw.inverse().max_abs_diff(&direct) < 1e-12, "{spec:?} m={m} n={n}");
                        let prod = sw.matrix().matmul(sw.inverse()).unwrap();
                        assert!(prod.max_abs_diff(&DenseMatrix::identity(m)) < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn kronecker_inverse_trivial_cases() {
        let a = DenseMatrix::from_rows(&[vec![2.0, 1.0], vec![0.0, 3.0]]).unwrap();
        let op = kronecker_sum_inverse(&a, &DenseMatrix::zeros(2, 2), 3).unwrap();
        assert!(op.identity_factor.max_abs_diff(&a.inverse().unwrap()) < 1e-15);
        assert!(op.ones_factor.frobenius_norm() < 1e-15);

        let i2 = DenseMatrix::identity(2);
        let op = kronecker_sum_inverse(&i2, &i2, 2).unwrap();
        assert!(op.identity_factor.max_abs_diff(&i2) < 1e-15);
        assert!(op.ones_factor.max_abs_diff(&i2.scale(-1.0 / 3.0)) < 1e-15);
        // (I⊗I + I⊗J₂)⁻¹ by direct inversion
        let dense = i2.kron(&i2).add(&i2.kron(&DenseMatrix::ones(2, 2))).unwrap();
        let direct = dense.inverse().unwrap();
        assert!(op.materialize(64).unwrap().max_abs_diff(&direct) < 1e-14);
    }

    #[test]
    fn kronecker_inverse_rejects_singular() {
        let a = DenseMatrix::identity(2);
        let b = DenseMatrix::identity(2).scale(-0.5);
        // A + 2B = 0
        assert!(matches!(
            kronecker_sum_inverse(&a, &b, 2),
            Err(JofcError::Singular(_))
        ));
    }

    #[test]
    fn single_modality_factors() {
        let n = 6;
        let op = laplacian_pseudoinverse_factors(&WeightSpec::uniform(1.0), 1, n).unwrap();
        let nf = n as f64;
        assert!((op.identity_factor[(0, 0)] - 1.0 / nf).abs() < 1e-15);
        assert!((op.ones_factor[(0, 0)] + 1.0 / (nf * nf)).abs() < 1e-15);
    }

    #[test]
    fn uniform_factors_match_oracle() {
        let spec = WeightSpec::uniform(1.0);
        let (m, n) = (2, 4);
        let l = laplacian(&dense_weight_matrix(&spec, m, n, 64).unwrap());
        let oracle = pseudoinverse_oracle(&l).unwrap();
        let fast = laplacian_pseudoinverse_factors(&spec, m, n)
            .unwrap()
            .materialize(64)
            .unwrap();
        assert!(fast.sub(&oracle).unwrap().frobenius_norm() < 1e-10);
    }

    #[test]
    fn factors_give_projector_identity() {
        for w in [0.5, 1.0, 7.0] {
            let spec = WeightSpec::uniform(w);
            let (m, n) = (3, 5);
            let order = m * n;
            let l = laplacian(&dense_weight_matrix(&spec, m, n, 64).unwrap());
            let lp = laplacian_pseudoinverse_factors(&spec, m, n)
                .unwrap()
                .materialize(64)
                .unwrap();
            let projector = DenseMatrix::identity(order)
                .sub(&DenseMatrix::ones(order, order).scale(1.0 / order as f64))
                .unwrap();
            assert!(lp.matmul(&l).unwrap().max_abs_diff(&projector) < 1e-10);
        }
    }

    #[test]
    fn dense_weight_blocks() {
        let w = 2.5;
        let n = 3;
        let dense = dense_weight_matrix(&WeightSpec::uniform(w), 2, n, 64).unwrap();
        let off = dense.submatrix(0, n, n, n);
        assert_eq!(off, DenseMatrix::identity(n).scale(w));
        let single = dense_weight_matrix(&WeightSpec::uniform(w), 1, 4, 64).unwrap();
        let expected = DenseMatrix::ones(4, 4).sub(&DenseMatrix::identity(4)).unwrap();
        assert_eq!(single, expected);
    }

    #[test]
    fn laplacian_degrees_are_weight_row_sums() {
        let spec = WeightSpec::Product {
            within: vec![0.5, 1.0, 2.0],
            c: 3.0,
        };
        let dense = dense_weight_matrix(&spec, 3, 4, 64).unwrap();
        let l = laplacian(&dense);
        for (i, s) in dense.row_sums().into_iter().enumerate() {
            assert!((l[(i, i)] - s).abs() < 1e-14);
        }
        assert!(l.row_sums().iter().all(|s| s.abs() < 1e-12));
    }

    #[test]
    fn dense_cap_is_enforced() {
        assert!(matches!(
            dense_weight_matrix(&WeightSpec::uniform(1.0), 3, 10, 20),
            Err(JofcError::SizeCap { size: 30, cap: 20 })
        ));
    }

    #[test]
    fn rejects_nonpositive_weights() {
        assert!(script_w(&WeightSpec::uniform(0.0), 2, 3).is_err());
        assert!(script_w(&WeightSpec::uniform(-1.0), 2, 3).is_err());
        let general = WeightSpec::GeneralSymmetric {
            matrix: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        };
        assert!(script_w(&general, 2, 3).is_err());
        let asym = WeightSpec::GeneralSymmetric {
            matrix: vec![vec![1.0, 2.0], vec![3.0, 1.0]],
        };
        assert!(script_w(&asym, 2, 3).is_err());
        let product = WeightSpec::Product {
            within: vec![1.0, 1.0],
            c: 0.0,
        };
        assert!(script_w(&product, 2, 3).is_err());
        assert!(script_w(&WeightSpec::uniform(1.0), 2, 1).is_err());
    }

    #[test]
    fn weight_spec_toml_round_trip() {
        let specs = [
            WeightSpec::uniform(0.5),
            WeightSpec::GeneralSymmetric {
                matrix: vec![vec![1.0, 2.0], vec![2.0, 3.0]],
            },
            WeightSpec::Product {
                within: vec![1.0, 2.0, 4.0],
                c: 2.0,
            },
        ];
        for spec in specs {
            let text = toml::to_string(&spec).unwrap();
            let back: WeightSpec = toml::from_str(&text).unwrap();
            assert_eq!(back, spec);
        }
    }
}
