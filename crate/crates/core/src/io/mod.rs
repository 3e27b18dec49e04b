//! Run configuration, figure presets, sweeps and on-disk artifacts.

mod artifacts;
mod config;
mod presets;
mod run;
mod svg;
mod sweep;

pub use artifacts::{compare_dirs, read_timeseries_csv, timeseries_csv, write_atomic, write_timeseries_csv};
pub use config::{
    parse_config, parse_config_value, ChainConfig, DecayConfig, DriveConfig, Engine, Flags, Numerics,
    OutputConfig, RunConfig, Scenario, SpectrumSettings, SweepAxis, SweepConfig, HEISENBERG_HORIZON,
    MAX_SWEEP_AXES,
};
pub use presets::{merge, preset, set_path, PRESET_NAMES};
pub use run::{execute, run_scenario, BathSummary, RunOutput, SpectrumSummary, Summary, GROUND_EQUAL_TOL};
pub use svg::{line_plot, Line};
pub use sweep::{execute_sweep, expand_sweep, run_sweep, Manifest, ManifestRow, SweepPoint};

use serde::Serialize;

use crate::error::{Error, Violation};

/// Machine-readable error record for stderr and sweep manifests.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorReport {
    pub error: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violation: Option<Violation>,
    pub exit_code: i32,
}

impl From<&Error> for ErrorReport {
    fn from(e: &Error) -> Self {
        Self {
            error: e.kind(),
            message: e.to_string(),
            path: match e {
                Error::Config { path, .. } => Some(path.clone()),
                _ => None,
            },
            violation: match e {
                Error::Aborted(v) => Some(v.clone()),
                _ => None,
            },
            exit_code: e.exit_code(),
        }
    }
}
