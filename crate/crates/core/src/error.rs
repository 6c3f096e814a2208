use thiserror::Error;

/// Errors raised while building operators, configuring schemes or running experiments.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("operator construction failed: {0}")]
    Construction(String),
    #[error("invalid configuration: {0}")]
    Configuration(String),
    #[error("argument outside the admissible domain: {0}")]
    Domain(String),
    #[error("time integration diverged at t = {t}")]
    Divergence { t: f64 },
    #[error("spectral analysis failed: {0}")]
    Analysis(String),
}

impl Error {
    /// Process exit code used by the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Construction(_) | Error::Configuration(_) => 1,
            Error::Domain(_) | Error::Divergence { .. } | Error::Analysis(_) => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
