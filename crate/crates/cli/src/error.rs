use std::path::PathBuf;

use priceflow_core::{AsymptoticError, FdError, HeatError, PriceError};
use thiserror::Error;

use crate::config::ConfigError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("price search failed: {0}")]
    Price(#[from] PriceError),
    #[error("heat evaluation failed: {0}")]
    Heat(#[from] HeatError),
    #[error("finite-difference solver failed: {0}")]
    Fd(#[from] FdError),
    #[error("asymptotics failed: {0}")]
    Asymptotic(#[from] AsymptoticError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Input { path: PathBuf, message: String },
    #[error("max |p_heat - p_fd| = {max:e} exceeds gate {gate:e}")]
    GateExceeded { max: f64, gate: f64 },
}

impl CliError {
    /// Process exit status: 1 gate exceeded, 2 configuration, 3 solver,
    /// 4 file input or output.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::GateExceeded { .. } => 1,
            // a step beyond the explicit stability bound is a solver rejection
            CliError::Config(ConfigError::Grid(FdError::UnstableTimeStep { .. })) => 3,
            CliError::Config(_) => 2,
            CliError::Price(_) | CliError::Heat(_) | CliError::Fd(_) | CliError::Asymptotic(_) => 3,
            CliError::Io { .. } | CliError::Input { .. } => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(ConfigError::Parse { .. }) => "ParseError",
            CliError::Config(ConfigError::UnknownKey { .. }) => "UnknownKey",
            CliError::Config(ConfigError::Grid(FdError::UnstableTimeStep { .. })) => "UnstableTimeStep",
            CliError::Config(_) => "ValidationError",
            CliError::Price(PriceError::BracketFailure { .. }) => "BracketFailure",
            CliError::Price(_) => "PriceError",
            CliError::Heat(_) => "HeatError",
            CliError::Fd(FdError::Instability { .. }) => "Instability",
            CliError::Fd(FdError::UnstableTimeStep { .. }) => "UnstableTimeStep",
            CliError::Fd(_) => "FdError",
            CliError::Asymptotic(_) => "AsymptoticError",
            CliError::Io { .. } => "IoError",
            CliError::Input { .. } => "InputError",
            CliError::GateExceeded { .. } => "GateExceeded",
        }
    }

    /// One line for standard error: `error code=<n> kind=<Kind> message="<text>"`.
    pub fn machine_line(&self) -> String {
        format!("error code={} kind={} message={:?}", self.exit_code(), self.kind(), self.to_string())
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}
