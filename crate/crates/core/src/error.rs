use thiserror::Error;

/// Everything that can go wrong between building an operator and writing a
/// scan to disk.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    #[error("embedding error: {0}")]
    Embedding(String),
    #[error("operator algebra error: {0}")]
    Algebra(String),
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("configuration error: {0}")]
    Configuration(String),
    #[error("liouvillian is not trace-annihilating: |vec(I)^T L| = {defect:e} (allowed {allowed:e})")]
    NotTraceAnnihilating { defect: f64, allowed: f64 },
    #[error("steady state is not unique: bordered system is singular at column {column}")]
    NonUniqueSteadyState { column: usize },
    #[error("solver did not converge: residual {residual:e} > tolerance {tolerance:e} ({detail})")]
    Solver { residual: f64, tolerance: f64, detail: String },
    #[error("truncation did not converge within cap {cap:?}: last relative change {last_change:e}")]
    TruncationNonConvergence { cap: (usize, usize), last_change: f64 },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("comparison error: {0}")]
    Comparison(String),
    #[error("not in the Mollow regime: {0}")]
    NotInMollowRegime(String),
    #[error("scan failed at grid point {index} (axis = {axis_value}): {source}")]
    ScanPoint {
        index: usize,
        axis_value: f64,
        #[source]
        source: Box<Error>,
    },
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Short machine-readable tag used by the command-line error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidDimension(_) => "invalid-dimension",
            Error::Embedding(_) => "embedding",
            Error::Algebra(_) => "algebra",
            Error::Parameter(_) => "parameter",
            Error::Configuration(_) => "configuration",
            Error::NotTraceAnnihilating { .. } => "not-trace-annihilating",
            Error::NonUniqueSteadyState { .. } => "non-unique-steady-state",
            Error::Solver { .. } => "solver",
            Error::TruncationNonConvergence { .. } => "truncation-nonconvergence",
            Error::ShapeMismatch(_) => "shape-mismatch",
            Error::Comparison(_) => "comparison",
            Error::NotInMollowRegime(_) => "not-in-mollow-regime",
            Error::ScanPoint { .. } => "scan-point",
            Error::Io { .. } => "io",
            Error::Parse(_) => "parse",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
