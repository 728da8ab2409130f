//! Crate-wide error type.

use alloc::string::String;
use core::fmt;

/// Result alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;

/// Errors raised by model construction, estimation, and decoding.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An operation received an empty input it cannot work with.
    EmptyInput(&'static str),
    /// A parameter is outside its documented range.
    InvalidArgument { what: &'static str, detail: String },
    /// Vector or matrix shapes do not agree.
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    /// An observation label is not part of the model's alphabet.
    UnknownObservation(String),
    /// A predictor value is NaN or infinite.
    NonFiniteValue { what: &'static str },
    /// Model components violate a structural invariant.
    InvalidModel { detail: String },
    /// No segmentation of the observation sequence has positive probability.
    InfeasibleDecode { detail: String },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::EmptyInput(what) => write!(f, "empty input: {what}"),
            Error::InvalidArgument { what, detail } => {
                write!(f, "invalid argument `{what}`: {detail}")
            }
            Error::DimensionMismatch {
                what,
                expected,
                got,
            } => write!(f, "dimension mismatch in {what}: expected {expected}, got {got}"),
            Error::UnknownObservation(label) => {
                write!(f, "observation label {label:?} is not in the model alphabet")
            }
            Error::NonFiniteValue { what } => write!(f, "non-finite value in {what}"),
            Error::InvalidModel { detail } => write!(f, "invalid model: {detail}"),
            Error::InfeasibleDecode { detail } => {
                write!(f, "no feasible segmentation: {detail}")
            }
        }
    }
}

impl core::error::Error for Error {}
