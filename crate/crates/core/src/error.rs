use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid {field}: {value} (admissible: {range})")]
    Domain {
        field: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("operation not defined for alpha = {0}")]
    UnsupportedAlpha(f64),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("truncation region has probability {0:e}, below 1e-12")]
    EmptyTruncationRegion(f64),

    #[error("mixture component {component} collapsed (total membership {mass:e})")]
    ComponentCollapse { component: usize, mass: f64 },

    #[error("data matrix does not have full column rank")]
    RankDeficientData,

    #[error("empirical characteristic function is degenerate: {0}")]
    DegenerateEcf(String),

    #[error("design matrix is ill-conditioned (condition number {0:e})")]
    IllConditioned(f64),

    #[error("iteration limit of {0} reached")]
    MaxIterations(usize),

    #[error("invalid input data: {0}")]
    InvalidData(String),

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },
}

impl Error {
    /// Short variant name, used by the command-line tool when reporting failures.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain { .. } => "DomainError",
            Error::UnsupportedAlpha(_) => "UnsupportedAlpha",
            Error::NumericalFailure(_) => "NumericalFailure",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::NotPositiveDefinite => "NotPositiveDefinite",
            Error::EmptyTruncationRegion(_) => "EmptyTruncationRegion",
            Error::ComponentCollapse { .. } => "ComponentCollapse",
            Error::RankDeficientData => "RankDeficientData",
            Error::DegenerateEcf(_) => "DegenerateEcf",
            Error::IllConditioned(_) => "IllConditioned",
            Error::MaxIterations(_) => "MaxIterations",
            Error::InvalidData(_) => "InvalidData",
            Error::Parse { .. } => "ParseError",
        }
    }

    pub(crate) fn domain(field: &'static str, value: f64, range: &'static str) -> Self {
        Error::Domain { field, value, range }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
