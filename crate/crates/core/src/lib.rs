//! Joint fidelity/commensurability (JOFC) embedding of several matched
//! dissimilarity matrices into one Euclidean space.
//!
//! The omnibus raw stress is minimized by Guttman transforms. The Laplacian
//! of the JOFC weight graph has the form `𝒲 ⊗ I_n + Z ⊗ J_n`, so its
//! pseudoinverse is available in closed form and each step reduces to
//! `m` block products combined through the small matrix `𝒲⁻¹`
//! ([`fjofc_embed`]). [`jofc_embed_reference`] runs the same iteration on
//! dense matrices and exists for checking and benchmarking.

pub mod error;
pub mod guttman;
pub mod harness;
pub mod init;
pub mod matrix;
pub mod oos;
pub mod problem;
pub mod rng;
pub mod solver;
pub mod stress;
pub mod weights;

pub use error::{JofcError, Result};
pub use guttman::{guttman_step_fast, guttman_step_reference, FastStep, PseudoinverseSource, ReferenceStep};
pub use init::{averaged_procrustes_init, cmds, imputed_omnibus_init, orthogonal_procrustes};
pub use matrix::{euclidean_distance_matrix, pseudoinverse_oracle, DenseMatrix, DissimilarityMatrix};
pub use oos::{oos_embed, oos_step_fast, oos_step_reference, oos_stress, OosDissimilarity, OosOptions, OosResult};
pub use problem::{Configuration, OmnibusProblem};
pub use rng::SeededRng;
pub use solver::{fjofc_embed, jofc_embed_reference, EmbeddingResult, InitStrategy, SolveOptions, Termination};
pub use stress::{normalized_stress, raw_stress, stress_gradient};
pub use weights::{laplacian_pseudoinverse_factors, script_w, script_w_inverse, WeightSpec, DEFAULT_DENSE_CAP};
