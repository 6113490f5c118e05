//! Command errors with their process exit codes:
//! 2 config, 3 numerical domain, 4 verification failure, 5 replica divergence.

use heavytail::bounds::BoundsError;
use heavytail::dynamics::DynamicsError;
use heavytail::losses::LossError;
use heavytail::specfun::SpecFunError;
use heavytail::stable::StableError;
use heavytail::wasserstein::WassersteinError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical domain error: {0}")]
    Domain(String),
    #[error("verification failure: {0}")]
    Verification(String),
    #[error("replica divergence: {0}")]
    Divergence(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Domain(_) => 3,
            CliError::Verification(_) => 4,
            CliError::Divergence(_) => 5,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(format!("io: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Config(format!("csv: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Config(format!("json: {e}"))
    }
}

impl From<BoundsError> for CliError {
    fn from(e: BoundsError) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl From<SpecFunError> for CliError {
    fn from(e: SpecFunError) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl From<StableError> for CliError {
    fn from(e: StableError) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl From<WassersteinError> for CliError {
    fn from(e: WassersteinError) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl From<LossError> for CliError {
    fn from(e: LossError) -> Self {
        match e {
            LossError::BadModelParams(msg) => CliError::Config(msg),
            LossError::BadCap(c) => CliError::Config(format!("surrogate cap {c} invalid")),
            other => CliError::Domain(other.to_string()),
        }
    }
}

impl From<DynamicsError> for CliError {
    fn from(e: DynamicsError) -> Self {
        match e {
            DynamicsError::Diverged { replica, step } => CliError::Divergence(format!(
                "replica {replica} produced a non-finite iterate at step {step}"
            )),
            DynamicsError::BadConfig(msg) => CliError::Config(msg),
            other => CliError::Domain(other.to_string()),
        }
    }
}
