use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// `row` and `column` are 1-based positions in the source file.
    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("cluster {0} has no points")]
    EmptyCluster(usize),

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("non-finite coordinate at point {point}, attribute {attribute}")]
    NonFinite { point: usize, attribute: usize },

    #[error("dimension mismatch: expected {expected} attributes, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("invalid mixture spec: {0}")]
    InvalidSpec(String),

    #[error("filter removed every point of the cluster")]
    EmptyAfterFilter,

    #[error("distance ladder has no rungs above zero (all points coincide with the center)")]
    DegenerateLadder,

    #[error("clusters {0} and {1} have coincident centers")]
    CoincidentCenters(usize, usize),

    #[error("invalid direction set: {0}")]
    InvalidDirections(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("at least two clusters are required, found {0}")]
    SingleCluster(usize),

    #[error("duplicate cluster count k = {0} in sweep results")]
    DuplicateK(usize),

    #[error("too few points: m = {m} but k_max = {k_max} requires m > k_max")]
    TooFewPoints { m: usize, k_max: usize },

    #[error("no neighbor relations found among {0} clusters")]
    NoNeighbors(usize),

    #[error("invalid manifest: {0}")]
    Manifest(String),

    #[error("serialization failed: {0}")]
    Serialize(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors that indicate a broken internal invariant rather than bad input.
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::NoNeighbors(_) | Error::Serialize(_))
    }
}
