//! Run configuration read from a JSON file.

use std::path::{Path, PathBuf};

use radial_spectra::modes::DEFAULT_MERGE_TOL;
use radial_spectra::{BoundaryCondition, OperatorKind};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Inclusive range of angular degrees `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeRange {
    pub from: u32,
    pub to: u32,
}

impl ModeRange {
    pub fn iter(&self) -> impl Iterator<Item = u32> + Clone {
        self.from..=self.to
    }

    pub fn contains(&self, k: u32) -> bool {
        (self.from..=self.to).contains(&k)
    }
}

pub const MAX_M: u32 = 64;
pub const MAX_K: u32 = 256;
pub const MAX_CELLS: usize = 1 << 22;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub operator: OperatorKind,
    pub m: u32,
    pub modes: ModeRange,
    pub pairs_per_mode: usize,
    pub r_max: f64,
    pub n_cells: usize,
    /// `None` selects the operator's default: Dirichlet for the quasi
    /// operator, natural for the drifted one.
    pub bc_outer: Option<BoundaryCondition>,
    pub merge_tol: f64,
    pub output_dir: PathBuf,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            operator: OperatorKind::Quasi,
            m: 3,
            modes: ModeRange { from: 0, to: 3 },
            pairs_per_mode: 4,
            r_max: 12.0,
            n_cells: 2400,
            bc_outer: None,
            merge_tol: DEFAULT_MERGE_TOL,
            output_dir: PathBuf::from("rspec-out"),
            seed: 0,
        }
    }
}

fn field(name: &str, detail: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{name}: {detail}"))
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let config: Self = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !(3..=MAX_M).contains(&self.m) {
            return Err(field("m", format!("must lie in 3..={MAX_M}, got {}", self.m)));
        }
        if self.modes.from > self.modes.to || self.modes.to > MAX_K {
            return Err(field(
                "modes",
                format!(
                    "need from <= to <= {MAX_K}, got {}..={}",
                    self.modes.from, self.modes.to
                ),
            ));
        }
        if !(self.r_max > 0.0 && self.r_max.is_finite()) {
            return Err(field(
                "r_max",
                format!("must be positive and finite, got {}", self.r_max),
            ));
        }
        if !(radial_spectra::measure::MIN_CELLS..=MAX_CELLS).contains(&self.n_cells) {
            return Err(field(
                "n_cells",
                format!(
                    "must lie in {}..={MAX_CELLS}, got {}",
                    radial_spectra::measure::MIN_CELLS,
                    self.n_cells
                ),
            ));
        }
        if self.pairs_per_mode == 0 || self.pairs_per_mode > self.n_cells {
            return Err(field(
                "pairs_per_mode",
                format!(
                    "must lie in 1..=n_cells ({}), got {}",
                    self.n_cells, self.pairs_per_mode
                ),
            ));
        }
        if !(self.merge_tol >= 0.0 && self.merge_tol < 1.0) {
            return Err(field(
                "merge_tol",
                format!("must lie in [0, 1), got {}", self.merge_tol),
            ));
        }
        if self.output_dir.as_os_str().is_empty() {
            return Err(field("output_dir", "must not be empty"));
        }
        Ok(())
    }

    pub fn bc(&self) -> BoundaryCondition {
        self.bc_outer.unwrap_or_else(|| self.operator.default_bc())
    }
}
