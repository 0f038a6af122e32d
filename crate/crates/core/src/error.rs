//! Error type shared across the crate.

use thiserror::Error;

/// Errors raised by model construction, distribution evaluation, ingestion,
/// and backtesting.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the mathematical domain of an operation
    /// (non-positive shape parameter, value outside a pmf's support, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Model inputs violated a structural invariant (e.g. cumulative
    /// positives exceeding cumulative tests).
    #[error("validation error: {0}")]
    Validation(String),

    /// A required column is absent from the input header.
    #[error("missing required column {0:?}")]
    MissingColumn(String),

    /// A date cell could not be parsed as an ISO-8601 calendar date.
    #[error("row {row}: unparseable date {value:?}")]
    BadDate { row: u64, value: String },

    /// A numeric cell could not be parsed as a non-negative integer.
    #[error("row {row}: unparseable count in column {column}: {value:?}")]
    BadCount {
        row: u64,
        column: String,
        value: String,
    },

    /// The same calendar date appeared on two rows.
    #[error("row {row}: duplicate date {date}")]
    DuplicateDate { row: u64, date: String },

    /// A row reported more positives than tests.
    #[error("row {row}: positives ({positives}) exceed tests ({tests})")]
    CountViolation {
        row: u64,
        positives: u64,
        tests: u64,
    },

    /// An operation that needs data was handed an empty series or sample.
    #[error("empty input: {0}")]
    Empty(String),

    /// The series is too short for the requested rolling evaluation.
    #[error("series too short: need at least {needed} effective days, have {have}")]
    SeriesTooShort { needed: usize, have: usize },

    /// An index lay outside the effective range of a series.
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True when the error describes bad user input (malformed files,
    /// out-of-domain parameters) rather than an internal failure.
    pub fn is_invalid_input(&self) -> bool {
        !matches!(self, Error::Io(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
