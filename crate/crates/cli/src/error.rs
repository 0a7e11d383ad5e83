//! Command failures and their exit codes.

use thiserror::Error;
use wavelocate::dispersion::DispersionError;
use wavelocate::eval::EvalError;
use wavelocate::mdn::MdnError;
use wavelocate::mfp::MfpError;
use wavelocate::wavefield::WavefieldError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("training diverged: {0}")]
    Diverged(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 4,
            CliError::Diverged(_) => 5,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<DispersionError> for CliError {
    fn from(e: DispersionError) -> Self {
        match e {
            DispersionError::InvalidMaterial(_)
            | DispersionError::InvalidGrid(_)
            | DispersionError::InvalidParameter(_)
            | DispersionError::UnknownMode(_) => CliError::Config(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<WavefieldError> for CliError {
    fn from(e: WavefieldError) -> Self {
        match e {
            WavefieldError::Dispersion(d) => d.into(),
            WavefieldError::InvalidParameter(_) | WavefieldError::InvalidScenario(_) => CliError::Config(e.to_string()),
            WavefieldError::Io(_) | WavefieldError::Json(_) | WavefieldError::Format(_) => CliError::Io(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<MfpError> for CliError {
    fn from(e: MfpError) -> Self {
        match e {
            MfpError::Wavefield(w) => w.into(),
            MfpError::EmptyModel { .. } => CliError::Numeric(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<MdnError> for CliError {
    fn from(e: MdnError) -> Self {
        match e {
            MdnError::NonFiniteActivation { .. } | MdnError::NonFiniteGradient | MdnError::DivergedTraining { .. } => {
                CliError::Diverged(e.to_string())
            }
            MdnError::Io(_) | MdnError::Json(_) | MdnError::Format(_) => CliError::Io(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Wavefield(w) => w.into(),
            EvalError::Mfp(m) => m.into(),
            EvalError::Mdn(m) => m.into(),
            EvalError::InvalidSweep(_) => CliError::Config(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}
