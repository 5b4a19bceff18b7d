//! `rustico` command-line runner.
//!
//! Exit codes: 0 success, 2 configuration or parameter error, 3 I/O error,
//! 4 evaluation error.

mod commands;
mod failure;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use failure::Failure;

#[derive(Debug, Parser)]
#[command(name = "rustico", version, about = "Configure, apply and evaluate COSFIRE / RUSTICO line filters")]
struct Cli {
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, env = "RUSTICO_JOBS", default_value_t = 0)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Push-pull operator (excitatory minus weighted inhibitory).
    Rustico,
    /// Excitatory filter only.
    Cosfire,
}

impl Mode {
    fn name(self) -> &'static str {
        match self {
            Mode::Rustico => "rustico",
            Mode::Cosfire => "cosfire",
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Configure the filter on a bar prototype and write the operator file.
    Configure {
        #[arg(long)]
        config: PathBuf,
        /// Operator file to write (default `<output>/filter.json`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute normalized response maps.
    Apply {
        #[arg(long)]
        config: PathBuf,
        /// Operator file from `configure`; configured afresh when omitted.
        #[arg(long)]
        filter: Option<PathBuf>,
        /// Output directory (default `<output>/responses`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write `<id>_mask.png` thresholded at this value.
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long, value_enum, default_value_t = Mode::Rustico)]
        mode: Mode,
        /// Input images; the configured dataset when none are given.
        images: Vec<PathBuf>,
    },
    /// Evaluate response maps against the dataset ground truth.
    Eval {
        #[arg(long)]
        config: PathBuf,
        /// Directory of `<id>.png` responses (default `<output>/responses`).
        #[arg(long)]
        responses: Option<PathBuf>,
        /// Report directory (default `<output>/eval`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// `per_image.csv` of another run for the paired significance test.
        #[arg(long)]
        baseline: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), Failure> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build_global()
        .map_err(|e| Failure::config(anyhow::anyhow!("thread pool: {e}")))?;
    match cli.command {
        Command::Configure { config, out } => commands::configure(&config, out.as_deref()),
        Command::Apply { config, filter, out, threshold, mode, images } => {
            commands::apply(&config, filter.as_deref(), out.as_deref(), threshold, mode, &images)
        }
        Command::Eval { config, responses, out, baseline } => {
            commands::eval(&config, responses.as_deref(), out.as_deref(), baseline.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.kind.code())
        }
    }
}
