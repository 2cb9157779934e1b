//! Per-iteration timing of the fast and dense iterations.
//!
//! Cells run one after another. Within a replicate both algorithms start
//! from the same imputed-omnibus configuration and run a fixed number of
//! steps; only the step call is timed.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{JofcError, Result};
use crate::harness::simulate::generate_matched;
use crate::init::imputed_omnibus_init;
use crate::solver::{fjofc_embed, jofc_embed_reference, InitStrategy, SolveOptions};
use crate::weights::{WeightSpec, DEFAULT_DENSE_CAP};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchCell {
    pub n: usize,
    pub m: usize,
}

/// ```toml
/// cells = [{ n = 100, m = 2 }, { n = 100, m = 3 }]
/// replicates = 3
/// iterations = 10
/// out = "bench.csv"
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchGrid {
    pub cells: Vec<BenchCell>,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default = "default_w")]
    pub w: f64,
    #[serde(default = "default_two")]
    pub dim: usize,
    #[serde(default = "default_two")]
    pub d: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub parallel: bool,
    #[serde(default = "default_cap")]
    pub dense_cap: usize,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

fn default_replicates() -> usize {
    3
}
fn default_iterations() -> usize {
    10
}
fn default_w() -> f64 {
    1.0
}
fn default_two() -> usize {
    2
}
fn default_cap() -> usize {
    DEFAULT_DENSE_CAP
}

impl BenchGrid {
    pub fn from_toml(text: &str) -> Result<Self> {
        let grid: Self = toml::from_str(text).map_err(|e| JofcError::Config(e.to_string()))?;
        if grid.cells.is_empty() || grid.replicates == 0 || grid.iterations == 0 {
            return Err(JofcError::Config(
                "bench grid needs cells, replicates >= 1 and iterations >= 1".into(),
            ));
        }
        Ok(grid)
    }
}

/// One output line; times are seconds per iteration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub n: usize,
    pub m: usize,
    pub replicates: usize,
    pub iterations: usize,
    pub fjofc_mean: f64,
    pub fjofc_stderr: f64,
    pub jofc_mean: f64,
    pub jofc_stderr: f64,
    /// `jofc_mean / fjofc_mean`.
    pub ratio: f64,
}

/// Sample mean and standard error (0 for a single value).
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let k = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / k, ly.iter().sum::<f64>() / k);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

pub fn run_cell(cell: BenchCell, grid: &BenchGrid) -> Result<BenchRow> {
    let spec = WeightSpec::uniform(grid.w);
    let mut fast_times = Vec::with_capacity(grid.replicates);
    let mut ref_times = Vec::with_capacity(grid.replicates);
    for r in 0..grid.replicates {
        let sim = generate_matched(cell.n, cell.m, grid.dim, grid.seed.wrapping_add(r as u64))?;
        let start = imputed_omnibus_init(&sim.problem, grid.d, grid.dense_cap)?;
        let options = SolveOptions {
            d: grid.d,
            eps: f64::MIN_POSITIVE,
            max_iterations: grid.iterations,
            parallel: grid.parallel,
            init: InitStrategy::Provided(start),
            dense_cap: grid.dense_cap,
            ..SolveOptions::default()
        };
        let per_step = |times: &[std::time::Duration]| {
            times.iter().map(|t| t.as_secs_f64()).sum::<f64>() / times.len().max(1) as f64
        };
        let fast = fjofc_embed(&sim.problem, &spec, &options)?;
        fast_times.push(per_step(&fast.step_times));
        let reference = jofc_embed_reference(&sim.problem, &spec, &options)?;
        ref_times.push(per_step(&reference.step_times));
        log::info!(
            "n={} m={} replicate {r}: fjofc {:.3e}s, jofc {:.3e}s per iteration",
            cell.n,
            cell.m,
            fast_times[r],
            ref_times[r]
        );
    }
    let (fjofc_mean, fjofc_stderr) = mean_stderr(&fast_times);
    let (jofc_mean, jofc_stderr) = mean_stderr(&ref_times);
    Ok(BenchRow {
        n: cell.n,
        m: cell.m,
        replicates: grid.replicates,
        iterations: grid.iterations,
        fjofc_mean,
        fjofc_stderr,
        jofc_mean,
        jofc_stderr,
        ratio: jofc_mean / fjofc_mean,
    })
}

pub fn run_bench(grid: &BenchGrid) -> Result<Vec<BenchRow>> {
    grid.cells.iter().map(|&cell| run_cell(cell, grid)).collect()
}

pub const BENCH_HEADER: &str = "n,m,replicates,iterations,fjofc_mean_s,fjofc_stderr_s,jofc_mean_s,jofc_stderr_s,ratio";

pub fn write_bench_csv(rows: &[BenchRow], path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| JofcError::io(path, e))?;
    let mut out = BufWriter::new(file);
    let mut line = |s: String| writeln!(out, "{s}").map_err(|e| JofcError::io(path, e));
    line(BENCH_HEADER.to_string())?;
    for r in rows {
        line(format!(
            "{},{},{},{},{},{},{},{},{}",
            r.n, r.m, r.replicates, r.iterations, r.fjofc_mean, r.fjofc_stderr, r.jofc_mean, r.jofc_stderr, r.ratio
        ))?;
    }
    out.flush().map_err(|e| JofcError::io(path, e))
}
