use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use primed_pca::data::{self, SpectrumSpec};
use primed_pca::runner::{self, RunConfig, RunOptions, SweepConfig};
use primed_pca::truth::GroundTruth;
use primed_pca::Error;

#[derive(Parser)]
#[command(
    name = "ppca",
    version,
    about = "Primed PCA: approximate priming followed by an exact eigensolve"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset from a spectrum spec (JSON) and write it as CSV.
    Gen {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute (or load from cache) the ground-truth eigendecomposition of a
    /// run config's dataset.
    Truth {
        #[arg(long)]
        config: PathBuf,
        /// Cache directory; defaults to the config's `truth_cache`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every repetition of an experiment and write series CSVs plus a manifest.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; defaults to the config's `output`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Check online that the exact step never shortens a streak when the
        /// variance-maximization conditions hold.
        #[arg(long)]
        verify_prop3: bool,
    },
    /// Run a learning-rate (or power epsilon) sweep and report the best candidate.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        #[arg(long)]
        verify_prop3: bool,
    },
    /// Summarize finished run directories into tables and curve CSVs.
    Report {
        #[arg(long)]
        out: PathBuf,
        #[arg(required = true)]
        runs: Vec<PathBuf>,
    },
    /// Run the three-axis scenario where the exact step swaps the ordering.
    Counterexample {
        #[arg(long, default_value_t = 0.01)]
        epsilon: f64,
    },
}

/// Failure classes mapped to exit codes.
enum Failure {
    Config(Error),
    Diverged(String),
    Other(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_)
            | Error::InvalidConfig(_)
            | Error::InvalidSpec(_)
            | Error::TooManyComponents { .. } => Failure::Config(e),
            Error::AllDiverged => Failure::Diverged(e.to_string()),
            e => Failure::Other(e),
        }
    }
}

fn config_err(e: Error) -> Failure {
    Failure::Config(e)
}

fn output_dir(flag: Option<PathBuf>, from_config: Option<&PathBuf>) -> Result<PathBuf, Failure> {
    flag.or_else(|| from_config.cloned()).ok_or_else(|| {
        Failure::Config(Error::Config(
            "no output directory: pass --out or set `output`".into(),
        ))
    })
}

fn read_spec(path: &Path) -> Result<SpectrumSpec, Failure> {
    let text = fs::read_to_string(path).map_err(|e| {
        config_err(Error::Io {
            path: path.into(),
            source: e,
        })
    })?;
    let spec: SpectrumSpec = serde_json::from_str(&text)
        .map_err(|e| config_err(Error::Config(format!("{}: {e}", path.display()))))?;
    spec.validate().map_err(config_err)?;
    Ok(spec)
}

fn execute(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Gen { config, out } => {
            let spec = read_spec(&config)?;
            let ds = data::generate_synthetic(&spec)?;
            data::write_csv(&ds, &out)?;
            println!(
                "wrote {} x {} dataset to {}",
                ds.rows(),
                ds.cols(),
                out.display()
            );
        }
        Command::Truth { config, out } => {
            let cfg = RunConfig::from_file(&config).map_err(config_err)?;
            let ds = cfg.dataset.load()?;
            let dir = out.or_else(|| cfg.truth_cache.clone());
            let truth = GroundTruth::load_or_compute(&ds, dir.as_deref())?;
            if let Some(dir) = &dir {
                println!(
                    "cache: {}",
                    GroundTruth::cache_path(dir, &truth.hash).display()
                );
            }
            println!("dataset hash: {}", truth.hash);
            for (i, v) in truth.values.iter().take(cfg.num_components()).enumerate() {
                println!("lambda_{} = {v:e}", i + 1);
            }
        }
        Command::Run {
            config,
            out,
            jobs,
            verify_prop3,
        } => {
            let cfg = RunConfig::from_file(&config).map_err(config_err)?;
            let dir = output_dir(out, cfg.output.as_ref())?;
            let opts = RunOptions { jobs, verify_prop3 };
            let outcome = runner::run_experiment(&cfg, &dir, &opts)?;
            let diverged = outcome
                .manifest
                .repetitions
                .iter()
                .filter(|r| matches!(r.status, runner::RepetitionStatus::Diverged { .. }))
                .count();
            println!(
                "{} repetitions written to {} ({diverged} diverged)",
                outcome.manifest.repetitions.len(),
                dir.display()
            );
            if outcome.manifest.all_diverged() {
                return Err(Failure::Diverged("every repetition diverged".into()));
            }
        }
        Command::Sweep {
            config,
            out,
            jobs,
            verify_prop3,
        } => {
            let cfg = SweepConfig::from_file(&config).map_err(config_err)?;
            let dir = output_dir(out, cfg.template.output.as_ref())?;
            let opts = RunOptions { jobs, verify_prop3 };
            let report = runner::sweep(&cfg, &dir, &opts)?;
            for c in &report.candidates {
                let score = c
                    .score
                    .map_or_else(|| "diverged".to_string(), |s| format!("{s:e}"));
                println!("{:e}\t{score}", c.value);
            }
            println!("best: {:e}", report.best);
        }
        Command::Report { out, runs } => {
            let summary = runner::report(&runs, &out)?;
            print!("{}", runner::report::render_table(&summary.rows));
        }
        Command::Counterexample { epsilon } => {
            if !(epsilon.is_finite() && (0.0..=1.0).contains(&epsilon)) {
                return Err(Failure::Config(Error::Config(
                    "epsilon must lie in [0, 1]".into(),
                )));
            }
            println!("{}", runner::run_counterexample(epsilon)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("config error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Diverged(msg)) => {
            eprintln!("diverged: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
