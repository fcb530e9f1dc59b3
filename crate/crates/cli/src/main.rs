//! `inverse-wulff`: command-line front end for the inverse Wulff solver.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;
use wulff_core::{AnisotropyError, AugmentationMode, CurveError, RelaxationError};

#[derive(Parser)]
#[command(name = "inverse-wulff", version, about = "Find the anisotropy whose Wulff shape best matches a planar curve")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fourier length spectrum and its diagnostics.
    Spectrum {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = 10)]
        modes: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Solve the inverse Wulff problem for one N.
    Solve {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = 10)]
        modes: usize,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Wulff shape, Frank diagram and σ samples from a stored sigma.json.
    Geometry {
        /// Defaults to OUT/sigma.json.
        #[arg(long)]
        sigma: Option<PathBuf>,
        #[arg(long, default_value_t = output::BOUNDARY_POINTS)]
        points: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Solve for a list of N and report experimental orders.
    Sweep {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        modes_list: Vec<usize>,
        #[command(flatten)]
        solver: SolverArgs,
        /// Worker threads when timings are off (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Dump the enhanced relaxation and compare the trace and full augmentations.
    RelaxDemo {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = 4)]
        modes: usize,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct InputArgs {
    /// Curve file: one "x y" vertex per line.
    #[arg(long, required_unless_present = "builtin", conflicts_with = "builtin")]
    input: Option<PathBuf>,
    /// circle, capsule, testcurve or polygon.
    #[arg(long)]
    builtin: Option<String>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, requires = "builtin")]
    params: Vec<f64>,
    /// Samples for builtin curves.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, default_value = "trace", value_parser = parse_augmentation)]
    augmentation: AugmentationMode,
    /// Gap and residual tolerance of the interior-point method.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Print the interior-point iterations to stderr.
    #[arg(long)]
    log_iterations: bool,
    /// Record wall-clock times; outputs are then no longer reproducible byte for byte.
    #[arg(long)]
    timings: bool,
}

fn parse_augmentation(s: &str) -> Result<AugmentationMode, String> {
    match s.parse()? {
        AugmentationMode::None => Err("augmentation must be full or trace".into()),
        m => Ok(m),
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Geometry(String),
    #[error("{0}")]
    Solver(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Geometry(_) => 3,
            CliError::Solver(_) => 4,
        }
    }
}

impl From<CurveError> for CliError {
    fn from(e: CurveError) -> Self {
        if e.is_input_error() {
            CliError::Input(e.to_string())
        } else {
            CliError::Geometry(e.to_string())
        }
    }
}

impl From<AnisotropyError> for CliError {
    fn from(e: AnisotropyError) -> Self {
        CliError::Geometry(e.to_string())
    }
}

impl From<RelaxationError> for CliError {
    fn from(e: RelaxationError) -> Self {
        match e {
            RelaxationError::Curve(c) => c.into(),
            RelaxationError::TooFewModes(_) => CliError::Input(e.to_string()),
            other => CliError::Solver(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Spectrum { input, modes, out } => commands::spectrum(&input, modes, &out),
        Command::Solve {
            input,
            modes,
            solver,
            out,
        } => commands::solve(&input, modes, &solver, &out),
        Command::Geometry { sigma, points, out } => commands::geometry(sigma.as_deref(), points, &out),
        Command::Sweep {
            input,
            modes_list,
            solver,
            threads,
            out,
        } => commands::sweep(&input, &modes_list, &solver, threads, &out),
        Command::RelaxDemo {
            input,
            modes,
            solver,
            out,
        } => commands::relax_demo(&input, modes, &solver, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
