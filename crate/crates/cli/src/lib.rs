//! Batch front end: config-driven runs that emit `cmat`/CSV artifacts and a
//! checksum manifest.

pub mod artifacts;
pub mod config;
pub mod run;

use std::path::PathBuf;

use thiserror::Error;

use pnfc_core::approx::ApproxError;
use pnfc_core::calculus::CalculusError;
use pnfc_core::funcspace::FuncError;
use pnfc_core::numerics::NumericsError;
use pnfc_core::spectra::SpectraError;

pub use artifacts::{ArtifactWriter, MANIFEST};
pub use config::{Command, Config};
pub use run::run;

pub const EXIT_OTHER: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_TOLERANCE: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Parse(String),
    #[error("{module}: {msg}")]
    Numeric { module: &'static str, msg: String },
    #[error("tolerance check failed: {0}")]
    Tolerance(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => EXIT_PARSE,
            CliError::Numeric { .. } => EXIT_NUMERIC,
            CliError::Tolerance(_) => EXIT_TOLERANCE,
            CliError::Io { .. } => EXIT_OTHER,
        }
    }
}

impl From<NumericsError> for CliError {
    fn from(e: NumericsError) -> Self {
        match e {
            NumericsError::Format { .. } => CliError::Parse(e.to_string()),
            NumericsError::Io { path, msg } => CliError::Io {
                path: path.into(),
                source: std::io::Error::other(msg),
            },
            e => CliError::Numeric {
                module: "numerics",
                msg: e.to_string(),
            },
        }
    }
}

impl From<SpectraError> for CliError {
    fn from(e: SpectraError) -> Self {
        match e {
            SpectraError::Numerics(e) => e.into(),
            e => CliError::Numeric {
                module: "spectra",
                msg: e.to_string(),
            },
        }
    }
}

impl From<FuncError> for CliError {
    fn from(e: FuncError) -> Self {
        match e {
            FuncError::Parse { .. } | FuncError::Arity { .. } => CliError::Parse(format!("function: {e}")),
            e => CliError::Numeric {
                module: "funcspace",
                msg: e.to_string(),
            },
        }
    }
}

impl From<CalculusError> for CliError {
    fn from(e: CalculusError) -> Self {
        match e {
            CalculusError::Numerics(e) => e.into(),
            CalculusError::Spectra(e) => e.into(),
            CalculusError::Func(e) => e.into(),
            e => CliError::Numeric {
                module: "calculus",
                msg: e.to_string(),
            },
        }
    }
}

impl From<ApproxError> for CliError {
    fn from(e: ApproxError) -> Self {
        match e {
            ApproxError::Numerics(e) => e.into(),
            ApproxError::Spectra(e) => e.into(),
            ApproxError::Calculus(e) => e.into(),
            ApproxError::Func(e) => e.into(),
            e => CliError::Numeric {
                module: "approx",
                msg: e.to_string(),
            },
        }
    }
}
