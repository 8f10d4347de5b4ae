use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at row {row}, column {column}: {message}")]
    Parse { row: usize, column: usize, message: String },
    #[error("non-finite value at row {row}, column {column}")]
    NonFinite { row: usize, column: usize },
    #[error("ragged row {row}: expected {expected} fields, found {found}")]
    Ragged { row: usize, expected: usize, found: usize },
    #[error("table needs at least 2 observations and 1 predictor, got {rows} rows and {columns} columns")]
    TooSmall { rows: usize, columns: usize },
    #[error("constant column '{name}' cannot be scaled to unit norm")]
    ConstantColumn { name: String },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("coordinate descent did not converge in {sweeps} sweeps (kkt violation {kkt:e})")]
    NonConvergence { sweeps: usize, kkt: f64 },
    #[error("singular system: {0}")]
    Singular(String),
    #[error("rank-deficient active set {active:?}")]
    RankDeficient { active: Vec<usize> },
    #[error("column {column} is not unit norm (norm {norm})")]
    NotUnitNorm { column: usize, norm: f64 },
    #[error("path fit failed at grid index {index}: {source}")]
    PathPoint {
        index: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("cross-validation failed in fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("benchmark run {run}, model {model}: {source}")]
    Run {
        run: usize,
        model: String,
        #[source]
        source: Box<Error>,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Data,
    Numerical,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Parse { .. }
            | Error::NonFinite { .. }
            | Error::Ragged { .. }
            | Error::TooSmall { .. }
            | Error::ConstantColumn { .. }
            | Error::DimensionMismatch(_)
            | Error::NotUnitNorm { .. }
            | Error::Io { .. } => ErrorKind::Data,
            Error::InvalidArgument(_) => ErrorKind::Usage,
            Error::NonConvergence { .. } | Error::Singular(_) | Error::RankDeficient { .. } => ErrorKind::Numerical,
            Error::PathPoint { source, .. } | Error::Fold { source, .. } | Error::Run { source, .. } => source.kind(),
        }
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
