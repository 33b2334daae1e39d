use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{0}")]
    Series(#[from] splitting_lab::SeriesError),
    #[error("{0}")]
    Dynamics(#[from] splitting_lab::dynamics::DynamicsError),
    #[error("{0}")]
    Json(#[from] splitting_lab::json::JsonError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "splitting-lab", version, about = "Formal separatrix series and manifold splitting for the discretized pendulum")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Order N of the formal series (even, at least 8).
    #[arg(long, global = true, default_value_t = 40)]
    pub order: usize,
    /// Working precision in bits.
    #[arg(long, global = true, env = "SPLITTING_LAB_BITS", default_value_t = 256)]
    pub bits: u32,
    /// Step size ε; repeat for several values.
    #[arg(long = "eps", global = true)]
    pub eps: Vec<f64>,
    /// Taylor order of the manifold parameterizations.
    #[arg(long, global = true, default_value_t = 40)]
    pub manifold_order: usize,
    /// Directory receiving the artifacts; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Scale one τ-table entry before validating (negative control).
    #[arg(long, global = true, hide = true)]
    pub corrupt_tau: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Exact polynomials A_1, A_3, … of the formal solution.
    Series,
    /// α, β, γ from the coefficient tail of J.
    Alpha,
    /// τ_0 … τ_N in monomial and derivative-normalized form.
    Tau,
    /// Manifold splitting scan for each ε.
    Splitting,
    /// Series α against the α implied by each splitting scan.
    Compare,
    /// Run the invariant suite.
    Validate,
}

pub const DEFAULT_EPS: [f64; 4] = [0.6, 0.5, 0.4, 0.3];

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub series_order: usize,
    pub precision_bits: u32,
    pub epsilon_list: Vec<f64>,
    pub manifold_order: usize,
    pub output_path: Option<PathBuf>,
    pub format: Format,
    pub corrupt_tau: Option<usize>,
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<Self, CliError> {
        let c = cli.common;
        let cfg = RunConfig {
            command: cli.command,
            series_order: c.order,
            precision_bits: c.bits,
            epsilon_list: if c.eps.is_empty() { DEFAULT_EPS.to_vec() } else { c.eps },
            manifold_order: c.manifold_order,
            output_path: c.out,
            format: c.format,
            corrupt_tau: c.corrupt_tau,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.series_order < 8 || !self.series_order.is_multiple_of(2) {
            return Err(CliError::Config(format!("--order must be even and at least 8, got {}", self.series_order)));
        }
        if self.precision_bits < 128 {
            return Err(CliError::Config(format!("--bits must be at least 128, got {}", self.precision_bits)));
        }
        if self.manifold_order < 10 {
            return Err(CliError::Config(format!("--manifold-order must be at least 10, got {}", self.manifold_order)));
        }
        if let Some(bad) = self.epsilon_list.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
            return Err(CliError::Config(format!("--eps must be positive, got {bad}")));
        }
        Ok(())
    }
}
