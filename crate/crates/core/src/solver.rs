//! Iterated Guttman transforms with stress bookkeeping.

use std::time::{Duration, Instant};

use crate::error::{JofcError, Result};
use crate::guttman::{FastStep, PseudoinverseSource, ReferenceStep};
use crate::init::{averaged_procrustes_init, imputed_omnibus_init};
use crate::problem::{Configuration, OmnibusProblem};
use crate::stress::{normalized_stress, raw_stress};
use crate::weights::{WeightSpec, DEFAULT_DENSE_CAP};

/// Starting configuration.
#[derive(Clone, Debug, PartialEq)]
pub enum InitStrategy {
    /// cMDS of the modality average, each modality's cMDS rotated onto it.
    AveragedProcrustes,
    /// cMDS of the omnibus with cross blocks imputed as `(Δ_i + Δ_j) / 2`.
    ImputedCmds,
    Provided(Configuration),
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    /// Embedding dimension.
    pub d: usize,
    /// Stop once the normalized stress decreases by less than this.
    pub eps: f64,
    pub max_iterations: usize,
    /// Compute the per-modality `B_ℓ X^(ℓ)` products concurrently.
    pub parallel: bool,
    pub init: InitStrategy,
    /// Rescale every modality to unit Frobenius norm before solving.
    pub normalize: bool,
    /// Keep every iterate (needed for relative-error traces).
    pub keep_iterates: bool,
    /// Order cap for anything the dense paths materialize.
    pub dense_cap: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            d: 2,
            eps: 1e-6,
            max_iterations: 1000,
            parallel: false,
            init: InitStrategy::AveragedProcrustes,
            normalize: false,
            keep_iterates: false,
            dense_cap: DEFAULT_DENSE_CAP,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(JofcError::InvalidInput("embedding dimension must be at least 1".into()));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(JofcError::InvalidInput(format!(
                "eps must be positive, got {}",
                self.eps
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxIterations,
}

#[derive(Clone, Debug)]
pub struct EmbeddingResult {
    pub config: Configuration,
    /// Raw stress of the initial configuration followed by one entry per step.
    pub stress_trace: Vec<f64>,
    /// `stress_trace` divided by `C(nm, 2)`.
    pub normalized_stress_trace: Vec<f64>,
    pub iterations: usize,
    pub terminated: Termination,
    /// Wall time of each Guttman step, excluding stress evaluation.
    pub step_times: Vec<Duration>,
    /// Initial configuration plus every iterate, when requested.
    pub iterates: Option<Vec<Configuration>>,
}

impl EmbeddingResult {
    pub fn final_stress(&self) -> f64 {
        *self.stress_trace.last().expect("trace holds the initial stress")
    }

    pub fn final_normalized_stress(&self) -> f64 {
        *self
            .normalized_stress_trace
            .last()
            .expect("trace holds the initial stress")
    }
}

/// Fast JOFC: structured Guttman steps with 𝒲⁻¹ only.
pub fn fjofc_embed(problem: &OmnibusProblem, spec: &WeightSpec, options: &SolveOptions) -> Result<EmbeddingResult> {
    options.validate()?;
    let normalized;
    let problem = if options.normalize {
        normalized = problem.normalized();
        &normalized
    } else {
        problem
    };
    let step = FastStep::new(problem, spec, options.parallel)?;
    iterate(problem, spec, options, |x| step.apply(x, problem))
}

/// Reference JOFC: dense `L† B(X) X` with `L†` from the closed-form factors.
pub fn jofc_embed_reference(
    problem: &OmnibusProblem,
    spec: &WeightSpec,
    options: &SolveOptions,
) -> Result<EmbeddingResult> {
    options.validate()?;
    let normalized;
    let problem = if options.normalize {
        normalized = problem.normalized();
        &normalized
    } else {
        problem
    };
    let step = ReferenceStep::new(problem, spec, PseudoinverseSource::Factors, options.dense_cap)?;
    iterate(problem, spec, options, |x| step.apply(x, problem))
}

pub(crate) fn initial_configuration(problem: &OmnibusProblem, options: &SolveOptions) -> Result<Configuration> {
    match &options.init {
        InitStrategy::AveragedProcrustes => averaged_procrustes_init(problem, options.d),
        InitStrategy::ImputedCmds => imputed_omnibus_init(problem, options.d, options.dense_cap),
        InitStrategy::Provided(c) => {
            c.check_against(problem)?;
            if c.d() != options.d {
                return Err(JofcError::Shape(format!(
                    "provided configuration has dimension {}, options ask for {}",
                    c.d(),
                    options.d
                )));
            }
            Ok(c.clone())
        }
    }
}

fn iterate(
    problem: &OmnibusProblem,
    spec: &WeightSpec,
    options: &SolveOptions,
    mut step: impl FnMut(&Configuration) -> Result<Configuration>,
) -> Result<EmbeddingResult> {
    let (m, n) = (problem.m(), problem.n());
    let mut x = initial_configuration(problem, options)?;
    let mut stress = raw_stress(&x, problem, spec)?;
    let mut stress_trace = vec![stress];
    let mut step_times = Vec::new();
    let mut iterates = options.keep_iterates.then(|| vec![x.clone()]);
    let mut terminated = Termination::MaxIterations;

    for _ in 0..options.max_iterations {
        let start = Instant::now();
        let next = step(&x)?;
        step_times.push(start.elapsed());
        let next_stress = raw_stress(&next, problem, spec)?;
        if !next_stress.is_finite() {
            return Err(JofcError::NonFinite(format!(
                "stress after iteration {}",
                step_times.len()
            )));
        }
        let decrease = normalized_stress(stress - next_stress, m, n);
        stress_trace.push(next_stress);
        if let Some(its) = iterates.as_mut() {
            its.push(next.clone());
        }
        x = next;
        stress = next_stress;
        if decrease < options.eps {
            terminated = Termination::Converged;
            break;
        }
    }

    let normalized_stress_trace = stress_trace.iter().map(|&s| normalized_stress(s, m, n)).collect();
    Ok(EmbeddingResult {
        config: x,
        normalized_stress_trace,
        iterations: step_times.len(),
        stress_trace,
        terminated,
        step_times,
        iterates,
    })
}
