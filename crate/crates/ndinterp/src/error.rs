//! Error taxonomy shared by all interpolation, collection and I/O operations.

use std::fmt;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors that can occur while building, compiling, evaluating or
/// (de)serializing interpolation tables.
///
/// The set of variants is closed: every fallible operation in this crate
/// reports one of these. Contract violations (evaluating an uncompiled
/// spline, advancing an argument cursor past its end) are panics, not
/// errors.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Not enough data points for the requested method.
    ///
    /// `level` and `path` locate the offending collection inside a
    /// multi-dimensional structure; both are empty/zero for plain 1D use.
    TooFewPoints {
        needed: usize,
        got: usize,
        level: usize,
        path: Vec<f64>,
    },
    /// An abscissa value lies outside the range spanned by the collection.
    ValueOutOfRange {
        value: f64,
        min: f64,
        max: f64,
        level: usize,
    },
    /// Arithmetic between collections whose abscissas differ.
    AbscissaMismatch(String),
    /// Two elements closer than the configured precision.
    DuplicateAbscissa { x: f64 },
    /// Structural mismatch: result shapes, argument counts, invalid axes.
    ShapeMismatch(String),
    /// Malformed or truncated table stream; `offset` is the byte position
    /// at which the failure was detected.
    IoFormat { offset: u64, reason: String },
}

impl Error {
    /// Shorthand for a 1D too-few-points error.
    pub fn too_few(needed: usize, got: usize) -> Self {
        Error::TooFewPoints {
            needed,
            got,
            level: 0,
            path: Vec::new(),
        }
    }

    /// Shorthand for a 1D out-of-range error.
    pub fn out_of_range(value: f64, min: f64, max: f64) -> Self {
        Error::ValueOutOfRange {
            value,
            min,
            max,
            level: 0,
        }
    }

    /// Attach a dimension level (and key path, where known) to an error
    /// raised inside a nested structure.
    pub(crate) fn at_level(self, level: usize, path: &[f64]) -> Self {
        match self {
            Error::TooFewPoints { needed, got, .. } => Error::TooFewPoints {
                needed,
                got,
                level,
                path: path.to_vec(),
            },
            Error::ValueOutOfRange {
                value, min, max, ..
            } => Error::ValueOutOfRange {
                value,
                min,
                max,
                level,
            },
            other => other,
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::TooFewPoints {
                needed,
                got,
                level,
                path,
            } => {
                write!(f, "too few points: need {needed}, got {got}")?;
                if !path.is_empty() {
                    write!(f, " at level {level}, key path {path:?}")?;
                } else if *level > 0 {
                    write!(f, " at level {level}")?;
                }
                Ok(())
            }
            Error::ValueOutOfRange {
                value,
                min,
                max,
                level,
            } => {
                write!(f, "value {value} out of range [{min}, {max}]")?;
                if *level > 0 {
                    write!(f, " at level {level}")?;
                }
                Ok(())
            }
            Error::AbscissaMismatch(detail) => write!(f, "abscissa mismatch: {detail}"),
            Error::DuplicateAbscissa { x } => write!(f, "duplicate abscissa {x}"),
            Error::ShapeMismatch(detail) => write!(f, "shape mismatch: {detail}"),
            Error::IoFormat { offset, reason } => {
                write!(f, "table format error at byte {offset}: {reason}")
            }
        }
    }
}

impl std::error::Error for Error {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_mentions_key_path() {
        let e = Error::too_few(3, 2).at_level(4, &[0.5, 1.0]);
        let text = e.to_string();
        assert!(text.contains("level 4"), "{text}");
        assert!(text.contains("0.5"), "{text}");
    }

    #[test]
    fn plain_errors_format() {
        assert_eq!(
            Error::too_few(2, 1).to_string(),
            "too few points: need 2, got 1"
        );
        assert!(Error::out_of_range(5.0, 0.0, 1.0)
            .to_string()
            .contains("out of range"));
    }
}
