//! Error type shared across the core modules.

use alloc::string::String;
use core::fmt;

/// Errors produced by core operations.
///
/// Every variant carries enough context to diagnose the failure without a
/// backtrace; shape errors name both offending shapes.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Two shapes that must agree do not.
    ShapeMismatch {
        /// What was being attempted.
        op: &'static str,
        /// Left-hand shape (rows, cols).
        left: (usize, usize),
        /// Right-hand shape (rows, cols).
        right: (usize, usize),
    },
    /// An input was empty or too short for the operation.
    EmptyInput(&'static str),
    /// A value violated a documented precondition.
    InvalidArgument(String),
    /// A non-finite value appeared where finiteness is required.
    NonFinite {
        /// Where the value was observed.
        context: &'static str,
        /// Parameter or element index, when known.
        index: Option<usize>,
    },
    /// Input data is malformed (bad header, inconsistent row, ...).
    Malformed(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ShapeMismatch { op, left, right } => write!(
                f,
                "{op}: shape mismatch {}x{} vs {}x{}",
                left.0, left.1, right.0, right.1
            ),
            Error::EmptyInput(what) => write!(f, "empty input: {what}"),
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::NonFinite { context, index } => match index {
                Some(i) => write!(f, "non-finite value in {context} (index {i})"),
                None => write!(f, "non-finite value in {context}"),
            },
            Error::Malformed(msg) => write!(f, "malformed data: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
