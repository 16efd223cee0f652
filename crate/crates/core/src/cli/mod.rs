//! Command-line driver. Each subcommand reads a [`RunConfig`], runs one
//! library operation and writes CSV or JSON to the output stream; diagnostics
//! go to stderr only.

mod commands;
pub mod config;

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::bogoliubov::BogoliubovError;
use crate::dispersion::DispersionError;
use crate::quadrature::{Interpretation, QuadratureError};
use crate::reconstruct::{Normalization, ReconstructError, SignMode};
use crate::spectra::SpectraError;

pub use commands::curve_grid;
pub use config::{Format, RunConfig};

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  1  I/O failure writing output
  2  configuration invalid (unreadable, schema violation, bad parameter)
  3  domain error (momentum outside the law's domain, no root, no maximum, ...)
  4  numerical failure (quadrature non-convergence, blow-up, fit mismatch)

Set TRANSPLANCK_LOG=info (or debug) for diagnostics on stderr.";

#[derive(Debug, Parser)]
#[command(name = "transplanck", version, about = "Trans-Planckian dispersion, Bogoliubov and tail-energy toolkit", after_help = EXIT_CODES)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct CommonArgs {
    /// JSON configuration file
    #[arg(long)]
    pub config: PathBuf,
    /// Output file (stdout when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    #[arg(long, value_enum)]
    pub interpretation: Option<InterpretationArg>,
    #[arg(long, value_enum)]
    pub sign: Option<SignArg>,
    #[arg(long, value_enum)]
    pub normalization: Option<NormalizationArg>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample ω(k) on a log-then-linear grid and flag the hump
    DispersionCurve {
        #[command(flatten)]
        common: CommonArgs,
        /// Number of grid points (overrides curve.samples)
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Tail/total energy-density ratio report
    Ratio {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// (β, L, k_H/k_p) ratio scan over the generalized-L law
    Scan {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// |β_k|² and its ingredients over a momentum range
    Bogoliubov {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// March the scale factor a(τ)
    Reconstruct {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Root of ω(k) = H₀
    FindKh {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Interior maximum of ω(k)
    FindHump {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Print the JSON schema of the configuration file
    Schema,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum InterpretationArg {
    IteratedInner,
    ChainRule,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SignArg {
    #[value(name = "eq27c")]
    Growing,
    #[value(name = "eq27d")]
    Oscillating,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum NormalizationArg {
    #[value(name = "paper-literal")]
    Literal,
    SecondDerivative,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Domain(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }
}

impl From<DispersionError> for CliError {
    fn from(e: DispersionError) -> Self {
        match e {
            DispersionError::InvalidParameter(_) => CliError::Config(e.to_string()),
            DispersionError::FitMismatch { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Domain(e.to_string()),
        }
    }
}

impl From<BogoliubovError> for CliError {
    fn from(e: BogoliubovError) -> Self {
        match e {
            BogoliubovError::InvalidParameter(_) => CliError::Config(e.to_string()),
            _ => CliError::Domain(e.to_string()),
        }
    }
}

impl From<QuadratureError> for CliError {
    fn from(e: QuadratureError) -> Self {
        match e {
            QuadratureError::InvalidConfig(_) => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<SpectraError> for CliError {
    fn from(e: SpectraError) -> Self {
        match e {
            SpectraError::Dispersion(d) => d.into(),
            SpectraError::Bogoliubov(b) => b.into(),
            SpectraError::Quadrature(q) => q.into(),
            SpectraError::InvalidScales(_)
            | SpectraError::InvalidConstant(_)
            | SpectraError::MissingScales => CliError::Config(e.to_string()),
            _ => CliError::Domain(e.to_string()),
        }
    }
}

impl From<ReconstructError> for CliError {
    fn from(e: ReconstructError) -> Self {
        match e {
            ReconstructError::Dispersion(d) => d.into(),
            ReconstructError::InvalidConfig(_) | ReconstructError::ZeroStep(..) => {
                CliError::Config(e.to_string())
            }
            ReconstructError::BlowUp { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Domain(e.to_string()),
        }
    }
}

/// Reads the config and applies command-line overrides.
fn load(common: &CommonArgs) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(&common.config).map_err(|e| {
        CliError::Config(format!("cannot read {}: {e}", common.config.display()))
    })?;
    let mut cfg = RunConfig::from_json(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", common.config.display())))?;
    if let Some(out) = &common.out {
        cfg.output.path = Some(out.clone());
    }
    if let Some(f) = common.format {
        cfg.output.format = Some(match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        });
    }
    if let Some(i) = common.interpretation {
        cfg.quadrature.interpretation = match i {
            InterpretationArg::IteratedInner => Interpretation::IteratedInner,
            InterpretationArg::ChainRule => Interpretation::ChainRule,
        };
    }
    if let Some(r) = cfg.reconstruction.as_mut() {
        if let Some(s) = common.sign {
            r.sign_mode = match s {
                SignArg::Growing => SignMode::Growing,
                SignArg::Oscillating => SignMode::Oscillating,
            };
        }
        if let Some(n) = common.normalization {
            r.normalization = match n {
                NormalizationArg::Literal => Normalization::Literal,
                NormalizationArg::SecondDerivative => Normalization::SecondDerivative,
            };
        }
    }
    cfg.quadrature.validate()?;
    Ok(cfg)
}

/// Runs one CLI invocation; the binary maps the error to an exit code.
pub fn run(cli: Cli) -> Result<(), CliError> {
    let (common, cmd) = match &cli.command {
        Command::Schema => {
            let mut out = io::stdout().lock();
            serde_json::to_writer_pretty(&mut out, &RunConfig::schema())
                .map_err(io::Error::from)?;
            writeln!(out)?;
            return Ok(());
        }
        Command::DispersionCurve { common, .. }
        | Command::Ratio { common }
        | Command::Scan { common }
        | Command::Bogoliubov { common }
        | Command::Reconstruct { common }
        | Command::FindKh { common }
        | Command::FindHump { common } => (common, &cli.command),
    };
    let cfg = load(common)?;
    log::info!("loaded {}", common.config.display());
    let bytes = match cmd {
        Command::DispersionCurve { samples, .. } => commands::dispersion_curve(&cfg, *samples)?,
        Command::Ratio { .. } => commands::ratio(&cfg)?,
        Command::Scan { .. } => commands::scan(&cfg)?,
        Command::Bogoliubov { .. } => commands::bogoliubov(&cfg)?,
        Command::Reconstruct { .. } => commands::reconstruct(&cfg)?,
        Command::FindKh { .. } => commands::find_kh(&cfg)?,
        Command::FindHump { .. } => commands::find_hump_cmd(&cfg)?,
        Command::Schema => unreachable!(),
    };
    match &cfg.output.path {
        Some(p) => fs::write(p, bytes)?,
        None => io::stdout().lock().write_all(&bytes)?,
    }
    Ok(())
}
