use polarwave::continuum::ContinuumError;
use polarwave::evans::EvansError;
use polarwave::model::ModelError;
use polarwave::particles::ParticleError;
use polarwave::spectra::SpectraError;
use thiserror::Error;

/// Failure of a command, classified by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad command line or configuration file.
    #[error("{0}")]
    Usage(String),
    /// Parameters outside the model's domain, including unphysical waves.
    #[error("{0}")]
    Domain(String),
    /// A computation failed to converge or went unstable.
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 64,
            CliError::Domain(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::Io(_) => 74,
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::NonMonotoneMap(_) | ModelError::NoConvergence(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Domain(e.to_string()),
        }
    }
}

impl From<ContinuumError> for CliError {
    fn from(e: ContinuumError) -> Self {
        match e {
            ContinuumError::Model(m) => m.into(),
            ContinuumError::InvalidConfig(_) => CliError::Domain(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<ParticleError> for CliError {
    fn from(e: ParticleError) -> Self {
        match e {
            ParticleError::TooFewCells(_) | ParticleError::InvalidInput(_) => CliError::Domain(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<SpectraError> for CliError {
    fn from(e: SpectraError) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl From<EvansError> for CliError {
    fn from(e: EvansError) -> Self {
        match e {
            EvansError::Model(m) => m.into(),
            EvansError::UnsupportedFamily(_) | EvansError::InvalidConfig(_) | EvansError::LeftOfBranchPoint { .. } => CliError::Domain(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
