use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("non-numeric cell at row {row}, column '{column}'")]
    Parse { row: usize, column: String },

    #[error("table is empty: {0}")]
    EmptyTable(String),

    #[error("invalid table: {0}")]
    InvalidTable(String),

    #[error("split fraction must lie in (0, 1), got {0}")]
    InvalidFraction(f64),

    #[error("column '{0}' has zero variance")]
    ZeroVariance(String),

    #[error("design matrix is rank deficient (singular value ratio {ratio:e})")]
    RankDeficient { ratio: f64 },

    #[error("need more rows than design columns: {rows} rows, {cols} columns")]
    InsufficientRows { rows: usize, cols: usize },

    #[error("target is constant; R^2 is undefined")]
    DegenerateTarget,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("unknown feature '{0}'")]
    UnknownFeature(String),

    #[error("not enough candidate features: need {needed}, have {available}")]
    NotEnoughFeatures { needed: usize, available: usize },

    #[error("table too small: {rows} rows, need more than {needed}")]
    TableTooSmall { rows: usize, needed: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("profile contains no relations")]
    EmptyProfile,

    #[error("unsupported profile format version {found} (expected {expected})")]
    VersionMismatch { found: u64, expected: u32 },

    #[error("corrupt profile: {0}")]
    CorruptProfile(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        let path = path.into();
        if source.kind() == std::io::ErrorKind::NotFound {
            Error::FileNotFound(path)
        } else {
            Error::Io { path, source }
        }
    }
}
