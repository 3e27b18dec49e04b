use std::fmt;

use serde::Serialize;
use thiserror::Error;

/// Where and how an integration run left its admissible region.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub step: usize,
    pub t: f64,
    pub quantity: String,
    pub value: f64,
    pub tolerance: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} = {:.3e} exceeds tolerance {:.1e} at step {} (t = {:.4} ps)",
            self.quantity, self.value, self.tolerance, self.step, self.t
        )
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("integration aborted: {0}")]
    Aborted(Violation),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Process exit code for the CLI: 2 for bad input, 3 for numerical aborts.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::Domain(_) | Error::Json(_) => 2,
            Error::Quadrature(_) | Error::Aborted(_) | Error::Numerical(_) | Error::Internal(_) => 3,
            Error::Io(_) => 1,
        }
    }

    /// Short machine-readable category used in CLI error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Config { .. } => "config",
            Error::Domain(_) => "domain",
            Error::Quadrature(_) => "quadrature",
            Error::Aborted(_) => "aborted",
            Error::Numerical(_) => "numerical",
            Error::Internal(_) => "internal",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
