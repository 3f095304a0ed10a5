use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the pipeline stages.
///
/// Filter rejections are *not* errors (they are verdicts carried by
/// [`crate::FilterOutcome`]); everything here either aborts a stage or
/// invalidates an input file.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed XML; `position` is the byte offset reported by the parser.
    #[error("malformed XML at byte {position}: {message}")]
    Xml { position: u64, message: String },

    /// Well-formed XML that violates the record contract (e.g. a missing
    /// or non-numeric PMID).
    #[error("invalid record ending at byte {position}: {message}")]
    Record { position: u64, message: String },

    #[error("journal table: {0}")]
    Table(String),

    #[error("journal table row {row}: {message}")]
    TableRow { row: u64, message: String },

    #[error("invalid fraction {0:?}: must be a decimal in (0, 1]")]
    InvalidFraction(String),

    #[error("invalid quantile {0:?}: must be a decimal in [0, 1]")]
    InvalidQuantile(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The quantile window selects zero documents (n * fraction < 1).
    #[error("selection window [{lower}, {upper}) selects no documents out of {total}")]
    EmptySelection {
        lower: String,
        upper: String,
        total: u64,
    },

    #[error("vocabulary: {0}")]
    Vocab(String),

    /// A score table was required but not supplied.
    #[error("metric {metric} requires a journal table")]
    MissingTable { metric: String },

    #[error("packed file: {0}")]
    PackFormat(String),

    /// The packed-file format version does not match this build.
    #[error("packed file format version {found} is not supported (expected {expected})")]
    PackVersion { found: u16, expected: u16 },

    #[error("plan: {0}")]
    Plan(String),

    #[error("stats: {0}")]
    Stats(String),

    #[error("unknown report format {0:?}")]
    UnknownFormat(String),

    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn xml(position: u64, message: impl Into<String>) -> Self {
        Error::Xml {
            position,
            message: message.into(),
        }
    }

    pub(crate) fn record(position: u64, message: impl Into<String>) -> Self {
        Error::Record {
            position,
            message: message.into(),
        }
    }
}
