use thiserror::Error;

use weaktrace::epsilon::EpsilonError;
use weaktrace::interferometer::LayoutError;
use weaktrace::pointer::PointerError;
use weaktrace::propagator::PropagatorError;
use weaktrace::spectrum::SpectrumError;
use weaktrace::tsvf::TsvfError;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration, layout or parameter.
    #[error("{0}")]
    Config(String),
    /// The physics has no answer for this input, e.g. a dark detector.
    #[error("{0}")]
    Physics(String),
    /// A consistency check ran and did not meet its tolerance.
    #[error("{0} check(s) failed")]
    CheckFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Physics(_) => 3,
            CliError::CheckFailed(_) => 1,
        }
    }
}

impl From<LayoutError> for CliError {
    fn from(e: LayoutError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<EpsilonError> for CliError {
    fn from(e: EpsilonError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<TsvfError> for CliError {
    fn from(e: TsvfError) -> Self {
        match e {
            TsvfError::ZeroOverlap { .. } => CliError::Physics(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<PointerError> for CliError {
    fn from(e: PointerError) -> Self {
        match e {
            PointerError::Tsvf(inner) => inner.into(),
            PointerError::ZeroNorm { .. } | PointerError::NoPath(_) => CliError::Physics(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<SpectrumError> for CliError {
    fn from(e: SpectrumError) -> Self {
        match e {
            SpectrumError::Tsvf(inner) => inner.into(),
            SpectrumError::DarkPortZeroNorm { .. } | SpectrumError::NoPath(_) => CliError::Physics(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<PropagatorError> for CliError {
    fn from(e: PropagatorError) -> Self {
        match e {
            PropagatorError::QuadratureNonconvergence(_) | PropagatorError::NotIntegrable(_) => {
                CliError::Physics(e.to_string())
            }
            _ => CliError::Config(e.to_string()),
        }
    }
}
