//! Command-line surface for `psd-schur`.
//!
//! Exit codes: 0 success, 1 usage or I/O failure, 2 mathematical rejection
//! (not PSD, not a state, not completely positive). Standard output carries
//! JSON only; diagnostics go to standard error.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use psd_schur::Error;

pub mod commands;
pub mod files;
pub mod golden;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Usage(String),
    Rejected(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Rejected(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "error: {m}"),
            CliError::Rejected(m) => write!(f, "rejected: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Dimension(_) | Error::NonFinite(_) | Error::InvalidParams(_) => {
                CliError::Usage(e.to_string())
            }
            Error::NotPsd {
                band, k, j, detail, ..
            } => CliError::Rejected(format!(
                "not positive semidefinite: band {band}, entry ({}, {}): {detail}",
                k + 1,
                j + 1
            )),
            other => CliError::Rejected(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "psdschur",
    version,
    about = "Contraction parameters of PSD matrices, states and channels"
)]
pub struct Cli {
    /// Absolute tolerance.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub abs_eps: f64,
    /// Relative tolerance.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub rel_eps: f64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Direct,
    Displacement,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SepMethod {
    Ppt,
    Params,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Psd,
    State,
    Channel,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Matrix file to parameters file.
    Parametrize {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Direct)]
        method: Method,
    },
    /// Parameters file to matrix file.
    Reconstruct {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write the upper triangular factor `A` with `A* A = S`.
        #[arg(long)]
        cholesky: Option<PathBuf>,
    },
    /// Purity, entropy and parameters of a density matrix.
    State {
        #[arg(long = "in")]
        input: PathBuf,
        /// Include parameters and basis coefficients.
        #[arg(long)]
        report: bool,
    },
    /// Complete positivity, Kraus operators and capacity from a Choi matrix.
    Channel {
        #[arg(long)]
        choi: PathBuf,
        #[arg(long)]
        din: usize,
        #[arg(long)]
        dout: usize,
        /// Write Kraus operators to `<prefix>_<n>.json`, `n` from 1.
        #[arg(long)]
        kraus: Option<String>,
        #[arg(long)]
        capacity: bool,
    },
    /// Separability verdict for a bipartite state.
    Separability {
        #[arg(long = "in")]
        input: PathBuf,
        /// `2x2`, `2x3` or `3x2`.
        #[arg(long)]
        dims: String,
        #[arg(long, value_enum, default_value_t = SepMethod::Ppt)]
        method: SepMethod,
    },
    /// Seeded random instance.
    Random {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        seed: u64,
        /// Rank of the PSD matrix or state; defaults to full rank.
        #[arg(long)]
        rank: Option<usize>,
        /// Project a random channel onto trace preserving ones.
        #[arg(long)]
        trace_preserving: bool,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Regenerate the golden files.
    Golden {
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = golden::DEFAULT_SEED)]
        seed: u64,
    },
}

/// Runs a parsed command, writing its JSON result to `stdout`.
pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    let tol = psd_schur::Tolerance::new(cli.abs_eps, cli.rel_eps)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let value = commands::dispatch(cli.command, tol)?;
    if let Some(v) = value {
        stdout
            .write_all(files::to_json_string(&v).as_bytes())
            .map_err(|e| CliError::Usage(format!("cannot write to stdout: {e}")))?;
    }
    Ok(())
}
