use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed header line {line}: expected 'KEY value'")]
    MalformedHeader { line: usize },

    #[error("unknown header key '{key}' at line {line}")]
    UnknownHeaderKey { key: String, line: usize },

    #[error("missing header key {0}")]
    MissingHeader(&'static str),

    #[error("row length mismatch at line {line}")]
    RowLengthMismatch { line: usize },

    #[error("value count mismatch: expected {expected} values, found {found}")]
    ValueCountMismatch { expected: usize, found: usize },

    #[error("non-numeric token '{token}' at line {line}")]
    NonNumericToken { token: String, line: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("no track points")]
    EmptyTrack,

    #[error("track line {line}: {msg}")]
    Track { line: usize, msg: String },

    #[error("geojson: {0}")]
    GeoJson(String),

    #[error("georeferencing mismatch: {0}")]
    GeorefMismatch(String),

    #[error("empty input list")]
    EmptyInput,

    #[error("bounds do not intersect the grid extent")]
    EmptyIntersection,

    #[error("no precipitation cluster on this day")]
    NoCluster,

    #[error("cell extends beyond the pole")]
    PoleOverflow,

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("index out of range: row {row}, col {col}")]
    IndexOutOfRange { row: usize, col: usize },

    #[error("{0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
