//! Declarative run configuration (TOML).
//!
//! ```toml
//! # exactly one of `inputs` or `[generator]`
//! inputs = ["view1.csv", "view2.csv"]
//!
//! algorithm = "fjofc"          # or "jofc_reference"
//! init = "averaged_procrustes" # or "imputed_cmds"
//! d = 2
//! eps = 1e-6
//! max_iterations = 1000
//! seed = 0
//! normalize = false
//! parallel = false
//! out = "embedding.csv"        # ".bin" selects the binary format
//!
//! [weights]
//! kind = "uniform"
//! w = 1.0
//! ```
//!
//! A generator section looks like
//! `[generator]` / `setting = "anomaly"` / `n = 400` / `m = 3` / `dim = 2` /
//! `n_anom = 10`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{JofcError, Result};
use crate::harness::io::load_dissimilarities;
use crate::harness::simulate::{generate_anomaly, Simulated};
use crate::problem::OmnibusProblem;
use crate::solver::{InitStrategy, SolveOptions};
use crate::weights::{WeightSpec, DEFAULT_DENSE_CAP};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Fjofc,
    #[value(alias = "jofc")]
    JofcReference,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitChoice {
    AveragedProcrustes,
    ImputedCmds,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Setting {
    Matched,
    Anomaly,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub setting: Setting,
    pub n: usize,
    pub m: usize,
    #[serde(default = "default_dim")]
    pub dim: usize,
    #[serde(default)]
    pub n_anom: usize,
}

impl GeneratorSpec {
    pub fn generate(&self, seed: u64) -> Result<Simulated> {
        let n_anom = match self.setting {
            Setting::Matched => 0,
            Setting::Anomaly => self.n_anom,
        };
        generate_anomaly(self.n, self.m, n_anom, self.dim, seed)
    }
}

fn default_dim() -> usize {
    2
}
fn default_d() -> usize {
    2
}
fn default_eps() -> f64 {
    1e-6
}
fn default_max_iterations() -> usize {
    1000
}
fn default_weights() -> WeightSpec {
    WeightSpec::uniform(1.0)
}
fn default_algorithm() -> Algorithm {
    Algorithm::Fjofc
}
fn default_init() -> InitChoice {
    InitChoice::AveragedProcrustes
}
fn default_cap() -> usize {
    DEFAULT_DENSE_CAP
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub inputs: Option<Vec<PathBuf>>,
    #[serde(default)]
    pub generator: Option<GeneratorSpec>,
    #[serde(default = "default_weights")]
    pub weights: WeightSpec,
    #[serde(default = "default_d")]
    pub d: usize,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_algorithm")]
    pub algorithm: Algorithm,
    #[serde(default = "default_init")]
    pub init: InitChoice,
    #[serde(default)]
    pub normalize: bool,
    #[serde(default)]
    pub parallel: bool,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default = "default_cap")]
    pub dense_cap: usize,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| JofcError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Reads a config file; relative input and output paths are resolved
    /// against the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| JofcError::io(path, e))?;
        let mut config = Self::from_toml(&text).map_err(|e| match e {
            JofcError::Config(msg) => JofcError::parse(path, msg),
            other => other,
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        if let Some(inputs) = config.inputs.as_mut() {
            for p in inputs.iter_mut() {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        if let Some(out) = config.out.as_mut() {
            if out.is_relative() {
                *out = base.join(&*out);
            }
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.inputs, &self.generator) {
            (Some(_), Some(_)) => {
                return Err(JofcError::Config("give either `inputs` or `[generator]`, not both".into()))
            }
            (None, None) => return Err(JofcError::Config("one of `inputs` or `[generator]` is required".into())),
            (Some(p), None) if p.is_empty() => return Err(JofcError::Config("`inputs` is empty".into())),
            _ => {}
        }
        self.solve_options().validate()?;
        let m = match (&self.inputs, &self.generator) {
            (Some(p), _) => p.len(),
            (_, Some(g)) => g.m,
            _ => unreachable!(),
        };
        self.weights.validate(m)
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            d: self.d,
            eps: self.eps,
            max_iterations: self.max_iterations,
            parallel: self.parallel,
            init: match self.init {
                InitChoice::AveragedProcrustes => InitStrategy::AveragedProcrustes,
                InitChoice::ImputedCmds => InitStrategy::ImputedCmds,
            },
            normalize: self.normalize,
            keep_iterates: false,
            dense_cap: self.dense_cap,
        }
    }

    /// The problem plus, for generated data, the ground truth.
    pub fn problem(&self) -> Result<(OmnibusProblem, Option<Simulated>)> {
        match (&self.inputs, &self.generator) {
            (Some(paths), None) => Ok((load_dissimilarities(paths)?, None)),
            (None, Some(spec)) => {
                let sim = spec.generate(self.seed)?;
                Ok((sim.problem.clone(), Some(sim)))
            }
            _ => Err(JofcError::Config("exactly one of `inputs` or `[generator]` is required".into())),
        }
    }
}
