//! `mwc-lab`: command-line driver for sign-pattern generation, quality
//! measures, recovery guarantees and the table reproductions.
//!
//! Artifacts go to `--out` (stdout when absent). `--record` writes a
//! separate run record with the command line and wall time, so the artifact
//! itself stays byte-identical across runs. Exit status is 0 on success, 2
//! on invalid input and 1 on internal failure.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Thread-count override, the only environment variable read.
pub const THREADS_ENV: &str = "MWC_LAB_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "mwc-lab",
    version,
    about = "Conditioning experiments for the modulated wideband converter"
)]
pub struct Cli {
    /// Artifact destination (stdout when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Also write a JSON run record (command, seed, outputs, wall time).
    #[arg(long, global = true)]
    pub record: Option<PathBuf>,
    /// Run seed.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

/// Where the sign matrix comes from.
#[derive(Debug, Clone, Args)]
pub struct InstanceArgs {
    /// Named preset.
    #[arg(long, conflicts_with_all = ["patterns", "family"])]
    pub preset: Option<String>,
    /// Pattern file written by `gen`.
    #[arg(long, conflicts_with = "family")]
    pub patterns: Option<PathBuf>,
    /// maximal, gold, kasami, hadamard or random.
    #[arg(long)]
    pub family: Option<String>,
    /// Register length (M = 2^n - 1 for the LFSR families).
    #[arg(long)]
    pub n: Option<u32>,
    /// Pattern length.
    #[arg(long = "M")]
    pub length: Option<usize>,
    /// Number of channels.
    #[arg(long = "m")]
    pub channels: Option<usize>,
    /// First row of the family enumeration to use.
    #[arg(long)]
    pub offset: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct BoundArgs {
    /// Sparsity the bound is evaluated at.
    #[arg(long)]
    pub k: Option<usize>,
    /// Isometry constant (default sqrt(2) - 1).
    #[arg(long)]
    pub delta: Option<f64>,
    /// Law of the nonzeros, e.g. complex-normal.
    #[arg(long)]
    pub dist: Option<String>,
    /// Monte-Carlo samples for the moment constants.
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a sign-pattern file.
    Gen(InstanceArgs),
    /// Quality measures, coherence, spectral norm and bound slacks.
    Measures(InstanceArgs),
    /// ExRIP probability of one instance.
    Exrip {
        #[command(flatten)]
        instance: InstanceArgs,
        #[command(flatten)]
        bound: BoundArgs,
    },
    /// Every implemented guarantee for one instance.
    Bounds {
        #[command(flatten)]
        instance: InstanceArgs,
        #[command(flatten)]
        bound: BoundArgs,
        /// Target probability of the RIP and StRIP bounds.
        #[arg(long, default_value_t = 0.97)]
        prob: f64,
        /// Candes-Plan constant; the bound is skipped without it.
        #[arg(long)]
        c: Option<f64>,
    },
    /// Monte-Carlo check of the ExRIP bound.
    Verify {
        #[command(flatten)]
        instance: InstanceArgs,
        #[command(flatten)]
        bound: BoundArgs,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// MMV support recovery by simultaneous OMP.
    Recover {
        #[command(flatten)]
        instance: InstanceArgs,
        /// Nonzero rows of U.
        #[arg(long)]
        k: Option<usize>,
        /// Number of measurement vectors.
        #[arg(long)]
        r: Option<usize>,
        /// Per-entry noise standard deviation.
        #[arg(long, conflicts_with = "snr")]
        sigma: Option<f64>,
        /// Signal-to-noise ratio in dB.
        #[arg(long)]
        snr: Option<f64>,
        #[arg(long)]
        dist: Option<String>,
        #[arg(long)]
        trials: Option<usize>,
        /// Per-trial outcomes as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// ExRIP probability and its approximation over a channel range.
    Sweep {
        #[command(flatten)]
        instance: InstanceArgs,
        #[command(flatten)]
        bound: BoundArgs,
        #[arg(long)]
        m_min: Option<usize>,
        #[arg(long)]
        m_max: Option<usize>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Minimal channel count per bound in the MWC setting.
    Table1 {
        #[arg(long, default_value = "table1_mwc")]
        preset: String,
        #[arg(long)]
        attempts: Option<usize>,
        #[arg(long)]
        ceiling: Option<usize>,
        /// Candes-Plan constant; the row is n/a without it.
        #[arg(long)]
        c: Option<f64>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Quality measures and ExRIP probabilities per sign-pattern family.
    Table2 {
        /// Comma-separated preset names (default: every table2 preset).
        #[arg(long, value_delimiter = ',')]
        presets: Vec<String>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

/// Failure category; decides the exit status.
#[derive(Debug)]
pub enum CliError {
    Invalid(String),
    Internal(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::Internal(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Invalid(m) | CliError::Internal(m) => m,
        }
    }
}

fn one_line(s: &str) -> String {
    s.lines()
        .map(str::trim)
        .find(|l| !l.is_empty())
        .unwrap_or("invalid arguments")
        .trim_start_matches("error: ")
        .to_string()
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| {
            CliError::Invalid(format!(
                "{THREADS_ENV} must be a positive integer, got '{value}'"
            ))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Internal(e.to_string()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // help and version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("error: {}", one_line(&e.to_string()));
            return ExitCode::from(2);
        }
    };
    match configure_threads().and_then(|()| commands::run(&cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", one_line(e.message()));
            ExitCode::from(e.code())
        }
    }
}
