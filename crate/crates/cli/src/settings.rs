//! Flag and config-file settings. Flags win over file values.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Deserialize;

use crate::exit::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

/// Flags shared by every subcommand. Each may also come from `--config`.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Shared {
    /// Operator JSON file.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Output file (verify, fuzz, exponent) or directory (figure1).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Check tolerance [default: 1e-9].
    #[arg(long)]
    pub tol: Option<f64>,
    /// Fuzz seed [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Fuzz trial count [default: 100].
    #[arg(long)]
    pub trials: Option<usize>,
    /// Number of grid points.
    #[arg(long)]
    pub grid: Option<usize>,
    /// RK4 step of the exponent ODE [default: 1e-3].
    #[arg(long)]
    pub step: Option<f64>,
    /// Time horizon [default: 1].
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Initial exponent [default: 2].
    #[arg(long)]
    pub p0: Option<f64>,
    /// Norm-ratio parameter; computed from --input when omitted there.
    #[arg(long)]
    pub r0: Option<f64>,
    /// Largest qubit count for fuzzing [default: 3].
    #[arg(long)]
    pub max_n: Option<usize>,
    /// Checks run by verify: lsi, faber_krahn, schwartz_zippel, hc.
    #[arg(long, value_delimiter = ',')]
    pub checks: Option<Vec<String>>,
    /// Re-run one fuzz instance from its descriptor.
    #[arg(long)]
    pub replay: Option<String>,
}

impl Shared {
    /// Fills unset fields from `file`.
    pub fn merged(self, file: Shared) -> Shared {
        Shared {
            input: self.input.or(file.input),
            out: self.out.or(file.out),
            tol: self.tol.or(file.tol),
            seed: self.seed.or(file.seed),
            trials: self.trials.or(file.trials),
            grid: self.grid.or(file.grid),
            step: self.step.or(file.step),
            horizon: self.horizon.or(file.horizon),
            format: self.format.or(file.format),
            p0: self.p0.or(file.p0),
            r0: self.r0.or(file.r0),
            max_n: self.max_n.or(file.max_n),
            checks: self.checks.or(file.checks),
            replay: self.replay.or(file.replay),
        }
    }
}

pub fn load_config(path: &Path) -> Result<Shared, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text)
        .map_err(|e| CliError::usage(format!("invalid config {}: {e}", path.display())))
}

/// Fully resolved and validated settings.
#[derive(Debug, Clone)]
pub struct CliConfig {
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub tol: f64,
    pub seed: u64,
    pub trials: usize,
    pub grid: Option<usize>,
    pub step: f64,
    pub horizon: f64,
    pub format: Option<Format>,
    pub p0: f64,
    pub r0: Option<f64>,
    pub max_n: usize,
    pub checks: Option<Vec<String>>,
    pub replay: Option<String>,
}

fn positive(name: &str, value: f64) -> Result<f64, CliError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(CliError::usage(format!(
            "--{name} must be a positive number, got {value}"
        )))
    }
}

impl CliConfig {
    pub fn resolve(s: Shared) -> Result<Self, CliError> {
        let trials = s.trials.unwrap_or(100);
        if trials == 0 {
            return Err(CliError::usage("--trials must be at least 1"));
        }
        if let Some(g) = s.grid {
            if g < 2 {
                return Err(CliError::usage(format!(
                    "--grid must be at least 2, got {g}"
                )));
            }
        }
        let p0 = s.p0.unwrap_or(2.0);
        if !(p0.is_finite() && p0 > 1.0) {
            return Err(CliError::usage(format!("--p0 must exceed 1, got {p0}")));
        }
        if let Some(r0) = s.r0 {
            if !(r0.is_finite() && r0 >= 0.0) {
                return Err(CliError::usage(format!(
                    "--r0 must be nonnegative, got {r0}"
                )));
            }
        }
        let max_n = s.max_n.unwrap_or(3);
        if !(1..=qhyper_core::MAX_QUBITS).contains(&max_n) {
            return Err(CliError::usage(format!(
                "--max-n must lie in 1..={}, got {max_n}",
                qhyper_core::MAX_QUBITS
            )));
        }
        if let Some(input) = &s.input {
            if !input.is_file() {
                return Err(CliError::usage(format!(
                    "input file {} not found",
                    input.display()
                )));
            }
        }
        Ok(Self {
            input: s.input,
            out: s.out,
            tol: positive("tol", s.tol.unwrap_or(1e-9))?,
            seed: s.seed.unwrap_or(0),
            trials,
            grid: s.grid,
            step: positive("step", s.step.unwrap_or(1e-3))?,
            horizon: positive("horizon", s.horizon.unwrap_or(1.0))?,
            format: s.format,
            p0,
            r0: s.r0,
            max_n,
            checks: s.checks,
            replay: s.replay,
        })
    }
}
