//! Error categories mapped to exit codes: input errors (unreadable or
//! malformed inputs) exit 2, violated preconditions exit 3, usage errors
//! exit 4, anything else exit 1.

use thiserror::Error;
use tmlab_core::green::GreenError;
use tmlab_core::liouville::LiouvilleError;
use tmlab_core::mesh::MeshError;
use tmlab_core::off::OffError;
use tmlab_core::operators::OperatorError;
use tmlab_core::probes::ProbeError;
use tmlab_core::spectrum::SpectrumError;
use tmlab_core::tm::TmError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("input error: {0}")]
    Input(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        Self::Usage(msg.into())
    }
    pub fn input(msg: impl Into<String>) -> Self {
        Self::Input(msg.into())
    }
    pub fn precondition(msg: impl Into<String>) -> Self {
        Self::Precondition(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 4,
            Self::Input(_) => 2,
            Self::Precondition(_) => 3,
            Self::Internal(_) => 1,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Internal(format!("io: {e}"))
    }
}

impl From<MeshError> for CliError {
    fn from(e: MeshError) -> Self {
        Self::Input(e.to_string())
    }
}

impl From<OffError> for CliError {
    fn from(e: OffError) -> Self {
        Self::Input(e.to_string())
    }
}

impl From<OperatorError> for CliError {
    fn from(e: OperatorError) -> Self {
        match e {
            OperatorError::TildeUndefined | OperatorError::AlphaNotBelowLambda { .. } => {
                Self::Precondition(e.to_string())
            }
            _ => Self::Internal(e.to_string()),
        }
    }
}

impl From<SpectrumError> for CliError {
    fn from(e: SpectrumError) -> Self {
        Self::Internal(e.to_string())
    }
}

impl From<TmError> for CliError {
    fn from(e: TmError) -> Self {
        match e {
            TmError::AlphaNotBelowLambda { .. }
            | TmError::BetaOutOfRange { .. }
            | TmError::ChiNonZero { .. }
            | TmError::ChiZero
            | TmError::BadEpsGrid => Self::Precondition(e.to_string()),
            other => Self::Internal(other.to_string()),
        }
    }
}

impl From<GreenError> for CliError {
    fn from(e: GreenError) -> Self {
        match e {
            GreenError::ChiZero
            | GreenError::AlphaNotBelowLambda { .. }
            | GreenError::EpsTooLarge { .. }
            | GreenError::CoreUnresolved { .. }
            | GreenError::HeightUndefined { .. } => Self::Precondition(e.to_string()),
            other => Self::Internal(other.to_string()),
        }
    }
}

impl From<LiouvilleError> for CliError {
    fn from(e: LiouvilleError) -> Self {
        match e {
            LiouvilleError::ChiZero
            | LiouvilleError::NonPositiveArgument { .. }
            | LiouvilleError::VolumeBelowThreshold { .. } => Self::Precondition(e.to_string()),
            other => Self::Internal(other.to_string()),
        }
    }
}

impl From<ProbeError> for CliError {
    fn from(e: ProbeError) -> Self {
        Self::Precondition(e.to_string())
    }
}
