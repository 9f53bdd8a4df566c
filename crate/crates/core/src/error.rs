use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Matrix or vector shapes that do not line up.
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    NonFinite {
        row: usize,
        column: usize,
    },
    UnknownColumn(String),
    EmptyTarget,
    EmptySource,
    EmptyTrainingSet,
    /// A partition bin or cluster ended up with no rows.
    EmptySubset {
        subset: usize,
    },
    /// `k` subsets were requested from only `n` rows.
    TooManySubsets {
        k: usize,
        n: usize,
    },
    NonBinaryLabel {
        row: usize,
        value: f64,
    },
    /// A metadata value that is not numeric where a number was required.
    NonNumericMeta {
        column: String,
        row: usize,
    },
    /// Time coordinate outside the configured range.
    OutOfRange {
        value: f64,
        lower: f64,
        upper: f64,
    },
    MetricMismatch,
    InvalidParameter {
        name: &'static str,
        reason: &'static str,
    },
    /// Degenerate input, e.g. PCA on constant columns.
    Degenerate(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch {
                context,
                expected,
                found,
            } => write!(f, "{context}: expected {expected}, found {found}"),
            Error::NonFinite { row, column } => {
                write!(f, "non-finite value at row {row}, column {column}")
            }
            Error::UnknownColumn(name) => write!(f, "unknown column `{name}`"),
            Error::EmptyTarget => f.write_str("empty target"),
            Error::EmptySource => f.write_str("empty source"),
            Error::EmptyTrainingSet => f.write_str("empty training set"),
            Error::EmptySubset { subset } => write!(f, "subset {} is empty", subset + 1),
            Error::TooManySubsets { k, n } => {
                write!(f, "cannot form {k} non-empty subsets from {n} rows")
            }
            Error::NonBinaryLabel { row, value } => {
                write!(f, "label {value} at row {row} is not 0 or 1")
            }
            Error::NonNumericMeta { column, row } => {
                write!(f, "metadata column `{column}` is not numeric at row {row}")
            }
            Error::OutOfRange {
                value,
                lower,
                upper,
            } => write!(f, "value {value} outside ({lower}, {upper}]"),
            Error::MetricMismatch => f.write_str("metrics of different kinds cannot be compared"),
            Error::InvalidParameter { name, reason } => write!(f, "invalid {name}: {reason}"),
            Error::Degenerate(what) => write!(f, "degenerate input: {what}"),
        }
    }
}

impl core::error::Error for Error {}
