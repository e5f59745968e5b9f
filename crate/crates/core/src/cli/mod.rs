//! Batch front end: one experiment per invocation, CSV and JSON artifacts.
//!
//! Every flag can also come from a JSON config file (`--config`), keyed by the
//! long flag name (`"dt"`, `"force-nmax"`, ...). Flags override file values.

pub mod complex;
mod run;

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

pub use complex::parse_complex;
pub use run::{run, Outcome};

use crate::evolution::EnergyConvention;

/// Exit status for successful runs.
pub const EXIT_OK: i32 = 0;
/// Exit status for invalid configuration or I/O problems.
pub const EXIT_VALIDATION: i32 = 2;
/// Exit status for numeric failures during a run.
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] crate::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numeric() => EXIT_NUMERIC,
            _ => EXIT_VALIDATION,
        }
    }

    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Evolve a coherent state and record observables over time.
    Evolve,
    /// Classical trajectory, closed form checked against RK4.
    Classical,
    /// Coherence defect, autocorrelation and Ehrenfest gap over time.
    Dephase,
    /// Single-valuedness test for coherent families.
    Nogo,
    /// Numerical resolution of the identity by coherent states.
    IdentityCheck,
    /// Position-space wave function of an evolved coherent state.
    Wavefunction,
    /// Revival times of the autocorrelation.
    Revival,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Evolve => "evolve",
            Command::Classical => "classical",
            Command::Dephase => "dephase",
            Command::Nogo => "nogo",
            Command::IdentityCheck => "identity-check",
            Command::Wavefunction => "wavefunction",
            Command::Revival => "revival",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    #[default]
    Analytic,
    Rk4,
}

/// Complex argument accepted as `a+bi` text or, in JSON, a bare number.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexArg(pub Complex64);

impl std::str::FromStr for ComplexArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        parse_complex(s).map(ComplexArg)
    }
}

impl<'de> Deserialize<'de> for ComplexArg {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(ComplexArg(Complex64::new(v, 0.0))),
            Raw::Text(s) => parse_complex(&s).map(ComplexArg).map_err(serde::de::Error::custom),
        }
    }
}

/// Comma-separated reals, or a JSON array.
#[derive(Clone, Debug, PartialEq)]
pub struct RealList(pub Vec<f64>);

impl std::str::FromStr for RealList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| format!("invalid number `{}` in list `{s}`", p.trim()))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(RealList)
    }
}

impl<'de> Deserialize<'de> for RealList {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            List(Vec<f64>),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::List(v) => Ok(RealList(v)),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Raw run configuration: every field optional so that a config file and
/// the command line can be layered.
#[derive(Clone, Debug, Default, PartialEq, Parser, Deserialize)]
#[command(name = "fofh", version, about = "Classical and quantum dynamics of H = f(H0)")]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct RunConfig {
    /// Experiment to run (may also come from the config file).
    #[arg(value_enum)]
    pub command: Option<Command>,

    /// JSON config file; flags given on the command line take precedence.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    /// f as `id`, `er`, `kerr:chi=<real>`, or an expression in x.
    #[arg(long = "f", value_name = "SPEC", allow_hyphen_values = true)]
    pub f: Option<String>,

    /// Coherent label alpha (annihilation eigenvalue), e.g. `1+0.5i`.
    #[arg(long, value_name = "COMPLEX", allow_hyphen_values = true)]
    pub alpha: Option<ComplexArg>,

    /// Phase point z0 = x0 + i p0 (alpha = z0 / sqrt 2 for quantum runs).
    #[arg(long, value_name = "COMPLEX", allow_hyphen_values = true)]
    pub z0: Option<ComplexArg>,

    /// End of the time grid [0, tmax]
    #[arg(long)]
    pub tmax: Option<f64>,

    /// Time step (default 0.01; 0.001 for `classical`)
    #[arg(long)]
    pub dt: Option<f64>,

    /// Fock truncation for quantum runs; highest level for `nogo`.
    #[arg(long)]
    pub nmax: Option<usize>,

    /// Accept an nmax below the truncation rule.
    #[arg(long)]
    pub force_nmax: bool,

    /// Energy fed to f' for the classical label: |alpha|^2 or |alpha|^2 + 1/2
    #[arg(long, value_enum)]
    pub energy_convention: Option<EnergyConvention>,

    /// CSV output path (default stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// JSON report path.
    #[arg(long)]
    pub json: Option<PathBuf>,

    /// Radii for `nogo`, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub radii: Option<RealList>,

    /// Largest winding number for `nogo`.
    #[arg(long)]
    pub kmax: Option<i64>,

    /// Integer-closeness tolerance for `nogo`.
    #[arg(long)]
    pub tol: Option<f64>,

    /// Residual floor for `nogo`.
    #[arg(long)]
    pub floor: Option<f64>,

    /// Write every residual sample of `nogo` to this CSV.
    #[arg(long)]
    pub dump_residuals: Option<PathBuf>,

    /// Autocorrelation threshold for revivals.
    #[arg(long)]
    pub threshold: Option<f64>,

    /// Disk radius for `identity-check`.
    #[arg(long)]
    pub radius: Option<f64>,

    /// Squared disk radius for `identity-check` (alternative to --radius).
    #[arg(long)]
    pub r2: Option<f64>,

    /// Radial quadrature nodes for `identity-check` (default 400)
    #[arg(long)]
    pub nr: Option<usize>,

    /// Angular quadrature nodes for `identity-check` (default 256)
    #[arg(long)]
    pub ntheta: Option<usize>,

    /// Evolution time for `wavefunction`.
    #[arg(long = "t")]
    pub t: Option<f64>,

    /// Left end of the `wavefunction` grid (default -8)
    #[arg(long, allow_hyphen_values = true)]
    pub xmin: Option<f64>,

    /// Right end of the `wavefunction` grid (default 8)
    #[arg(long, allow_hyphen_values = true)]
    pub xmax: Option<f64>,

    /// Points in the `wavefunction` grid (default 801)
    #[arg(long)]
    pub nx: Option<usize>,

    /// Trajectory written by `classical`.
    #[arg(long, value_enum)]
    pub method: Option<Method>,
}

impl ValueEnum for EnergyConvention {
    fn value_variants<'a>() -> &'a [Self] {
        &[EnergyConvention::Classical, EnergyConvention::QuantumMean]
    }

    fn to_possible_value(&self) -> Option<clap::builder::PossibleValue> {
        Some(clap::builder::PossibleValue::new(self.as_str()))
    }
}

impl RunConfig {
    /// `other`'s values win wherever they are set.
    pub fn overlay(mut self, other: RunConfig) -> RunConfig {
        macro_rules! take {
            ($($field:ident),*) => {
                $(if other.$field.is_some() { self.$field = other.$field; })*
            };
        }
        take!(
            command,
            config,
            f,
            alpha,
            z0,
            tmax,
            dt,
            nmax,
            energy_convention,
            out,
            json,
            radii,
            kmax,
            tol,
            floor,
            dump_residuals,
            threshold,
            radius,
            r2,
            nr,
            ntheta,
            t,
            xmin,
            xmax,
            nx,
            method
        );
        self.force_nmax |= other.force_nmax;
        self
    }

    /// Reads the config file named by `--config`, if any, and lays the
    /// command-line values over it.
    pub fn resolve_layers(self) -> Result<RunConfig, CliError> {
        match &self.config {
            Some(path) => Ok(load_config(path)?.overlay(self)),
            None => Ok(self),
        }
    }
}

/// Parses a JSON config file. Unknown keys are rejected.
pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Parses config text; errors carry line and column.
pub fn parse_config(text: &str) -> Result<RunConfig, serde_json::Error> {
    serde_json::from_str(text)
}
