use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("unsupported number of atoms: {0}")]
    UnsupportedAtomCount(usize),

    #[error("invalid scan grid: {0}")]
    InvalidGrid(String),

    #[error("singular configuration: cavity-field denominator vanishes")]
    SingularConfiguration,

    #[error("Liouvillian has no unique steady state: {0}")]
    NoUniqueSteadyState(String),

    #[error("steady-state solver did not converge after {iterations} iterations (residual {residual:.3e})")]
    SolverNotConverged { iterations: usize, residual: f64 },

    #[error("invalid HMM: {0}")]
    InvalidModel(String),

    #[error("switch probability {0} maps to an infinite jump rate")]
    InfiniteRate(f64),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { field, reason: reason.into() }
    }

    /// True for errors caused by bad user input rather than numerics or I/O.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. }
                | Error::UnsupportedAtomCount(_)
                | Error::InvalidGrid(_)
                | Error::InvalidModel(_)
                | Error::Parse(_)
        )
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<toml::de::Error> for Error {
    fn from(e: toml::de::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
