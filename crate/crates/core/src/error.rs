use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Text-format parse failure. `line` and `column` are 1-based; column 0
    /// means the whole line.
    #[error("{}line {line}, column {column}: {message}", .path.as_ref().map(|p| format!("{}: ", p.display())).unwrap_or_default())]
    Parse {
        path: Option<PathBuf>,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grids are not aligned: {0}")]
    NotAligned(String),

    #[error("distance transform needs at least one feature cell")]
    EmptyFeatureSet,

    #[error("layer has no valid cells")]
    AllNodata,

    #[error("invalid GeoJSON: {0}")]
    GeoJson(String),

    #[error("unsupported geometry type `{0}`")]
    UnsupportedGeometry(String),

    #[error("polygon ring is not closed (first vertex {first:?}, last vertex {last:?})")]
    UnclosedRing { first: [f64; 2], last: [f64; 2] },

    #[error("attribute table has no column `{0}`")]
    MissingColumn(String),

    #[error("zone code {0} has no attribute row")]
    MissingZone(u32),

    #[error("attribute `{column}` of zone {zone} out of range: {value}")]
    AttributeRange { zone: u32, column: String, value: f64 },

    #[error("criterion `{criterion}` references missing layer `{layer}`")]
    MissingLayer { criterion: String, layer: String },

    #[error("invalid suitability spec: {0}")]
    InvalidSpec(String),

    #[error("levelize needs at least 4 valid cells, found {0}")]
    TooFewCells(usize),

    #[error("no suitability model for region `{0}`")]
    MissingRegionModel(String),

    #[error("palette has no entry for code {0}")]
    MissingPaletteEntry(u32),

    #[error("value {0} is not a palette code")]
    NotACode(f64),

    #[error("image shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("image too small: {0}")]
    ImageTooSmall(String),

    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("dataset export: {0}")]
    Dataset(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{0}")]
    Json(#[from] serde_json::Error),
}

/// Coarse error categories, used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad configuration, spec, palette or command arguments.
    Config,
    /// Unreadable or inconsistent input data.
    Data,
    /// A bug.
    Internal,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Config(_)
            | Error::InvalidSpec(_)
            | Error::MissingLayer { .. }
            | Error::MissingPaletteEntry(_)
            | Error::NotACode(_)
            | Error::ShapeMismatch(_) => ErrorClass::Config,
            Error::MissingRegionModel(_) => ErrorClass::Internal,
            _ => ErrorClass::Data,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: None,
            line,
            column,
            message: message.into(),
        }
    }

    /// Attaches a file path to a parse error that was produced from text.
    pub fn with_path(self, p: impl Into<PathBuf>) -> Self {
        match self {
            Error::Parse {
                path: None,
                line,
                column,
                message,
            } => Error::Parse {
                path: Some(p.into()),
                line,
                column,
                message,
            },
            other => other,
        }
    }
}
