//! `jofc` command line: embed, oos, simulate, bench, eval.
//!
//! Exit status is 0 on success, 1 for invalid input or configuration, 2 for
//! numerical failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use jofc::harness::bench::{run_bench, write_bench_csv, BenchGrid};
use jofc::harness::config::{Algorithm, RunConfig, Setting};
use jofc::harness::io::{
    load_embedding, load_indices, load_vector, save_dissimilarity, save_embedding, save_indices,
};
use jofc::harness::metrics::{clustering_ari, confusion_ratio, MetricsReport};
use jofc::harness::simulate::generate_anomaly;
use jofc::{fjofc_embed, jofc_embed_reference, oos_embed, JofcError, OosDissimilarity, OosOptions, Result, WeightSpec};

#[derive(Parser)]
#[command(name = "jofc", version, about = "Joint fidelity/commensurability embedding")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Embed the modalities described by a run config.
    Embed {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        algorithm: Option<Algorithm>,
        /// Uniform commensurability weight (replaces the config's weights).
        #[arg(long)]
        w: Option<f64>,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        parallel: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Place one new object, seen in every modality, into a saved embedding.
    Oos {
        #[arg(long)]
        embedding: PathBuf,
        /// One file per modality holding the n dissimilarities to the new object.
        #[arg(long, num_args = 1.., required = true)]
        deltas: Vec<PathBuf>,
        #[arg(long)]
        w: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
        #[arg(long, default_value_t = 1000)]
        max_iterations: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a synthetic problem: modality_<i>.csv, labels.txt, anomalies.txt.
    Simulate {
        #[arg(long, value_enum)]
        setting: Setting,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 10)]
        n_anom: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Time both iterations over a grid of (n, m) cells.
    Bench {
        #[arg(long)]
        grid: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score an embedding against object labels (and anomalies).
    Eval {
        #[arg(long)]
        embedding: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        anomalies: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Embed {
            config,
            algorithm,
            w,
            d,
            eps,
            seed,
            parallel,
            out,
        } => {
            let mut cfg = RunConfig::load(&config)?;
            if let Some(a) = algorithm {
                cfg.algorithm = a;
            }
            if let Some(w) = w {
                cfg.weights = WeightSpec::uniform(w);
            }
            if let Some(d) = d {
                cfg.d = d;
            }
            if let Some(eps) = eps {
                cfg.eps = eps;
            }
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            cfg.parallel |= parallel;
            if out.is_some() {
                cfg.out = out;
            }
            cfg.validate()?;
            embed(&cfg)
        }
        Command::Oos {
            embedding,
            deltas,
            w,
            seed,
            eps,
            max_iterations,
            out,
        } => {
            let x = load_embedding(&embedding)?;
            let vectors = deltas.iter().map(|p| load_vector(p)).collect::<Result<Vec<_>>>()?;
            let deltas = OosDissimilarity::new(vectors)?;
            let options = OosOptions { eps, max_iterations };
            let result = oos_embed(&x, &deltas, w, &options, seed)?;
            let mut text = String::from("modality");
            for t in 1..=result.y.cols() {
                text.push_str(&format!(",x{t}"));
            }
            text.push('\n');
            for i in 0..result.y.rows() {
                let coords: Vec<String> = result.y.row(i).iter().map(f64::to_string).collect();
                text.push_str(&format!("{i},{}\n", coords.join(",")));
            }
            log::info!(
                "out-of-sample stress {} after {} iterations",
                result.stress_trace.last().copied().unwrap_or(f64::NAN),
                result.iterations
            );
            write_or_print(out.as_deref(), &text)
        }
        Command::Simulate {
            setting,
            n,
            m,
            dim,
            n_anom,
            seed,
            out,
        } => {
            let n_anom = if setting == Setting::Anomaly { n_anom } else { 0 };
            let sim = generate_anomaly(n, m, n_anom, dim, seed)?;
            std::fs::create_dir_all(&out).map_err(|e| io_error(&out, e))?;
            for (i, delta) in sim.problem.modalities().iter().enumerate() {
                save_dissimilarity(delta, &out.join(format!("modality_{i}.csv")))?;
            }
            save_indices(&sim.labels, &out.join("labels.txt"))?;
            save_indices(&sim.anomalies, &out.join("anomalies.txt"))?;
            println!("wrote {m} modalities of {n} objects to {}", out.display());
            Ok(())
        }
        Command::Bench { grid, out } => {
            let text = std::fs::read_to_string(&grid).map_err(|e| io_error(&grid, e))?;
            let mut spec = BenchGrid::from_toml(&text).map_err(|e| JofcError::Config(format!("{}: {e}", grid.display())))?;
            if out.is_some() {
                spec.out = out;
            }
            let rows = run_bench(&spec)?;
            let path = spec.out.unwrap_or_else(|| PathBuf::from("bench.csv"));
            write_bench_csv(&rows, &path)?;
            println!("wrote {} cells to {}", rows.len(), path.display());
            Ok(())
        }
        Command::Eval {
            embedding,
            labels,
            anomalies,
            seed,
        } => {
            let x = load_embedding(&embedding)?;
            let labels = load_indices(&labels)?;
            let mut report = MetricsReport {
                ari: Some(clustering_ari(&x, &labels, &[], seed)?),
                ..MetricsReport::default()
            };
            if let Some(path) = anomalies {
                let anomalies = load_indices(&path)?;
                if !anomalies.is_empty() {
                    report.confusion_ratio = Some(confusion_ratio(&x, &anomalies)?);
                    report.ari_non_anomalous = Some(clustering_ari(&x, &labels, &anomalies, seed)?);
                }
            }
            print_report(&report)
        }
    }
}

fn embed(cfg: &RunConfig) -> Result<()> {
    let (problem, sim) = cfg.problem()?;
    let options = cfg.solve_options();
    let result = match cfg.algorithm {
        Algorithm::Fjofc => fjofc_embed(&problem, &cfg.weights, &options)?,
        Algorithm::JofcReference => jofc_embed_reference(&problem, &cfg.weights, &options)?,
    };
    let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from("embedding.csv"));
    save_embedding(&result.config, &out)?;
    let mut report = MetricsReport::from_result(&result);
    if let Some(sim) = sim {
        report.ari = Some(clustering_ari(&result.config, &sim.labels, &[], cfg.seed)?);
        if !sim.anomalies.is_empty() {
            report.confusion_ratio = Some(confusion_ratio(&result.config, &sim.anomalies)?);
            report.ari_non_anomalous = Some(clustering_ari(&result.config, &sim.labels, &sim.anomalies, cfg.seed)?);
        }
    }
    eprintln!("wrote {}", out.display());
    print_report(&report)
}

fn print_report(report: &MetricsReport) -> Result<()> {
    let text = toml::to_string(report).map_err(|e| JofcError::Config(e.to_string()))?;
    print!("{text}");
    Ok(())
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| io_error(p, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn io_error(path: &Path, source: std::io::Error) -> JofcError {
    JofcError::Io {
        path: path.to_path_buf(),
        source,
    }
}
