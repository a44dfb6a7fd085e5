use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at {path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("duplicate user id `{0}`")]
    DuplicateId(String),
    #[error("corpus has {found} labeled records, need at least {need} to split")]
    TooFewRecords { need: usize, found: usize },
    #[error("view `{0}` is empty for this record")]
    EmptyView(String),
    #[error("no walks were provided to the embedding trainer")]
    EmptyWalks,
    #[error("fusion input is missing view `{0}`")]
    MissingView(String),
    #[error("width mismatch for {what}: expected {expected}, got {got}")]
    WidthMismatch {
        what: String,
        expected: usize,
        got: usize,
    },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("invalid class index {index} for {num_classes} classes")]
    InvalidClass { index: usize, num_classes: usize },
    #[error("all timesteps are masked")]
    AllMasked,
    #[error("loss became non-finite at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },
    #[error("field `{0}` is empty for every user in the corpus")]
    FieldEmptyForAllUsers(String),
    #[error("backend `{name}` unavailable: {reason}")]
    BackendUnavailable { name: String, reason: String },
    #[error("no users found for class `{0}`")]
    EmptyClass(String),
    #[error("geocoder unavailable: {0}")]
    GeocoderUnavailable(String),
    #[error("degenerate annotation marginals: chance agreement is 1 but annotations disagree")]
    DegenerateMarginals,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
