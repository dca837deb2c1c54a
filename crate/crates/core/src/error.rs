use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("state is not normalized (squared norm {norm_sqr})")]
    Normalization { norm_sqr: f64 },

    #[error("not a projector: {0}")]
    NotProjector(String),

    #[error("outcome has zero probability; cannot collapse onto it")]
    ZeroProbability,

    #[error("sample {index} is the zero vector")]
    DegenerateSample { index: usize },

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("requested {requested} components but numerical rank is {rank}")]
    Rank { requested: usize, rank: usize },

    #[error("value out of range: {0}")]
    Range(String),

    #[error("model integrity check failed: {0}")]
    ModelIntegrity(String),

    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("unsupported format: {0}")]
    Format(String),

    #[error("unsupported model format version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },

    #[error("usage error: {0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub(crate) fn range(msg: impl Into<String>) -> Self {
        Error::Range(msg.into())
    }

    pub(crate) fn parse(offset: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            offset,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short stable name of the error kind, used in CLI diagnostics and records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Dimension(_) => "DimensionError",
            Error::Normalization { .. } => "NormalizationError",
            Error::NotProjector(_) => "NotProjectorError",
            Error::ZeroProbability => "ZeroProbabilityError",
            Error::DegenerateSample { .. } => "DegenerateSampleError",
            Error::Numerical(_) => "NumericalError",
            Error::Rank { .. } => "RankError",
            Error::Range(_) => "RangeError",
            Error::ModelIntegrity(_) => "ModelIntegrityError",
            Error::Parse { .. } => "ParseError",
            Error::Format(_) => "FormatError",
            Error::Version { .. } => "VersionError",
            Error::Usage(_) => "UsageError",
            Error::Io { .. } => "IoError",
        }
    }
}
