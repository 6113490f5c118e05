//! Command implementations. Each returns the finished report plus an
//! optional deferred failure, so reports are always written before a
//! nonzero exit.

pub mod bounds_cmd;
pub mod gcurve;
pub mod moments;
pub mod sweep;
pub mod validate;

use crate::config::ConfigMap;
use crate::error::CliError;
use crate::report::Report;
use heavytail::losses::LossModel;

pub struct CommandOutput {
    pub report: Report,
    pub failure: Option<CliError>,
    /// Additional files written next to the report: (suffix, content).
    pub extra_files: Vec<(String, String)>,
}

impl CommandOutput {
    pub fn ok(report: Report) -> Self {
        Self {
            report,
            failure: None,
            extra_files: Vec::new(),
        }
    }
}

// Random-stream allocation: replica simulation owns stream ids 0..R
// (dynamics contract); auxiliary draws live in disjoint high ranges.
pub const STREAM_DATASET: u64 = 1 << 32;
pub const STREAM_POPULATION: u64 = 2 << 32;
pub const STREAM_LIPSCHITZ: u64 = 3 << 32;
pub const STREAM_HARVEST: u64 = 4 << 32;
pub const STREAM_VALIDATE: u64 = 5 << 32;

/// Model selection shared by the sweep and bounds commands. Model
/// parameters come from the config file (keys x_min, x_max, m0, coupling,
/// dim) with CLI-visible defaults.
pub fn resolve_model(cfg: &ConfigMap, flag: Option<&str>) -> Result<LossModel, CliError> {
    let name: String = cfg.resolve(
        "model",
        flag.map(str::to_string),
        "quadratic-1d".to_string(),
    )?;
    match name.as_str() {
        "quadratic-1d" => {
            let x_min = cfg.resolve("x_min", None, 0.5)?;
            let x_max = cfg.resolve("x_max", None, 1.0)?;
            Ok(LossModel::quadratic_1d(x_min, x_max)?)
        }
        "dissipative-nonconvex" => {
            let m0 = cfg.resolve("m0", None, 2.0)?;
            let a = cfg.resolve("coupling", None, 0.5)?;
            let x_max = cfg.resolve("x_max", None, 1.0)?;
            let dim = cfg.resolve("dim", None, 3usize)?;
            Ok(LossModel::dissipative_nonconvex(m0, a, x_max, dim)?)
        }
        other => Err(CliError::Config(format!(
            "unknown model {other:?}; expected quadratic-1d or dissipative-nonconvex"
        ))),
    }
}
