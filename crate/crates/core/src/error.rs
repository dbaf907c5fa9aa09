use thiserror::Error;

/// Errors raised anywhere in the coupling stack.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("rank deficient least-squares system (|r_jj| = {diag:e} at column {column})")]
    RankDeficient { column: usize, diag: f64 },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("residual difference vanished; relaxation factor kept")]
    DegenerateResidual,

    #[error("snapshot iteration {got} does not follow {last}")]
    Sequence { last: usize, got: usize },

    #[error("every difference column was filtered")]
    AllColumnsFiltered,

    #[error("non-physical state: {0}")]
    NonPhysical(String),

    #[error("incompressibility dilemma: {0}")]
    IncompressibilityDilemma(String),

    #[error("subproblem solver diverged: {0}")]
    SolverDiverged(String),

    #[error("boundary condition not supported by this solver: {0}")]
    UnsupportedBoundary(String),

    #[error("coupling did not converge within {iterations} iterations (relative residual {residual:e})")]
    MaxIterationsExceeded { iterations: usize, residual: f64 },

    #[error("configuration error at `{path}`: {reason}")]
    Config { path: String, reason: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn config(path: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            reason: reason.into(),
        }
    }

    /// True for failures that mean the coupled problem cannot be solved by the
    /// chosen scheme, as opposed to misuse of the API.
    pub fn is_dilemma(&self) -> bool {
        matches!(self, Error::IncompressibilityDilemma(_))
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
