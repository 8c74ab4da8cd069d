//! Report envelope and file emission.
//!
//! Floats are written in the shortest decimal form that parses back to the
//! same value (`{:?}` in text tables, `serde_json` in reports), so repeated
//! runs produce identical bytes.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;

pub const OUTPUT_DIR_ENV: &str = "RSPEC_OUTPUT_DIR";

#[derive(Debug, Serialize)]
pub struct Report<'a, T: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    /// Seconds since the Unix epoch; the only field allowed to differ
    /// between runs.
    pub timestamp: u64,
    pub config: &'a RunConfig,
    pub payload: T,
}

impl<'a, T: Serialize> Report<'a, T> {
    pub fn new(command: &'static str, config: &'a RunConfig, payload: T) -> Self {
        let timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            timestamp,
            config,
            payload,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}

pub fn num(x: f64) -> String {
    format!("{x:?}")
}

/// Two-column `r value` table.
pub fn dat_columns(rs: &[f64], values: &[f64]) -> String {
    let mut s = String::new();
    for (r, v) in rs.iter().zip(values) {
        let _ = writeln!(s, "{} {}", num(*r), num(*v));
    }
    s
}

/// Output directory: the flag, then the environment override, then the
/// config file.
pub fn resolve_output_dir(flag: Option<&Path>, env: Option<&str>, config: &RunConfig) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| env.filter(|v| !v.is_empty()).map(PathBuf::from))
        .unwrap_or_else(|| config.output_dir.clone())
}

pub struct OutputDir {
    root: PathBuf,
    written: Vec<PathBuf>,
}

impl OutputDir {
    pub fn create(root: PathBuf) -> Result<Self, CliError> {
        std::fs::create_dir_all(&root).map_err(|e| CliError::io(&root, e))?;
        Ok(Self {
            root,
            written: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<PathBuf, CliError> {
        let path = self.root.join(name);
        std::fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
        self.written.push(path.clone());
        Ok(path)
    }

    pub fn into_written(self) -> Vec<PathBuf> {
        self.written
    }
}
