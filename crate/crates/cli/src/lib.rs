//! Command-line front end for `radial-spectra`.

// `!(x > 0.0)` rejects NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use commands::{ConvergeTarget, PoissonRhs};
use config::RunConfig;
use error::CliError;
use output::{resolve_output_dir, OutputDir};

#[derive(Debug, Parser)]
#[command(
    name = "rspec",
    version,
    about = "Radial spectra of the quasi-Laplacian and the drifted Laplacian"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides RSPEC_OUTPUT_DIR and the config file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-mode eigenvalues and the merged spectrum.
    Spectrum(Common),
    /// One sampled eigenfunction as an `r f(r)` table.
    Eigenfunction {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        n: u32,
    },
    /// Inequality and asymptotics battery.
    Verify(Common),
    /// Weak Poisson solve with the manufactured or a file right-hand side.
    Poisson {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        k: u32,
        /// One sample per line (or `r f` columns), n_cells lines.
        #[arg(long)]
        rhs_file: Option<PathBuf>,
    },
    /// Refinement study with observed order.
    Converge {
        #[command(flatten)]
        common: Common,
        /// Eigenvalue index within mode k, or "poisson".
        #[arg(long)]
        target: ConvergeTarget,
        /// Mode; defaults to the first configured mode.
        #[arg(long)]
        k: Option<u32>,
        /// Comma-separated cell counts; defaults to n_cells/4, n_cells/2, n_cells.
        #[arg(long, value_delimiter = ',')]
        ladder: Option<Vec<usize>>,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Spectrum(c) | Command::Verify(c) => c,
            Command::Eigenfunction { common, .. }
            | Command::Poisson { common, .. }
            | Command::Converge { common, .. } => common,
        }
    }
}

/// Result of one invocation.
#[derive(Debug)]
pub struct Outcome {
    pub exit_code: i32,
    pub written: Vec<PathBuf>,
}

/// Loads the configuration, runs `command` and writes its files.
/// `env_out` is the value of the output-directory environment variable.
pub fn run(command: &Command, env_out: Option<&str>) -> Result<Outcome, CliError> {
    let common = command.common();
    let config = RunConfig::load(&common.config)?;
    let mut out = OutputDir::create(resolve_output_dir(common.out.as_deref(), env_out, &config))?;
    let exit_code = match command {
        Command::Spectrum(_) => commands::cmd_spectrum(&config, &mut out)?,
        Command::Eigenfunction { k, n, .. } => commands::cmd_eigenfunction(&config, *k, *n, &mut out)?,
        Command::Verify(_) => commands::cmd_verify(&config, &mut out)?,
        Command::Poisson { k, rhs_file, .. } => {
            let rhs = rhs_file.clone().map_or(PoissonRhs::Manufactured, PoissonRhs::File);
            commands::cmd_poisson(&config, *k, &rhs, &mut out)?
        }
        Command::Converge { target, k, ladder, .. } => {
            let k = k.unwrap_or(config.modes.from);
            commands::cmd_converge(&config, k, *target, ladder.as_deref(), &mut out)?
        }
    };
    Ok(Outcome {
        exit_code,
        written: out.into_written(),
    })
}
