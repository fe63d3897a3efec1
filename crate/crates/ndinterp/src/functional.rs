//! The evaluation contract shared by every interpolator: a recursive
//! function call over a sequence of arguments, plus the policy deciding
//! what happens when an interpolation fails.

use crate::error::{Error, Result};
use crate::linear::Linear;

/// A read cursor over the argument sequence of a multi-dimensional call.
///
/// Every functional consumes exactly its own number of dimensions from
/// the cursor. Advancing past the end is a contract violation and panics.
#[derive(Debug)]
pub struct ArgumentCursor<'a> {
    args: &'a [f64],
    pos: usize,
}

impl<'a> ArgumentCursor<'a> {
    pub fn new(args: &'a [f64]) -> Self {
        ArgumentCursor { args, pos: 0 }
    }

    /// Consume and return the next argument.
    pub fn next_argument(&mut self) -> f64 {
        assert!(
            self.pos < self.args.len(),
            "argument cursor advanced past the end ({} arguments)",
            self.args.len()
        );
        let x = self.args[self.pos];
        self.pos += 1;
        x
    }

    /// Consume the next `count` arguments as a slice.
    pub fn take(&mut self, count: usize) -> &'a [f64] {
        assert!(
            self.pos + count <= self.args.len(),
            "argument cursor advanced past the end ({} arguments, {} requested)",
            self.args.len(),
            count
        );
        let slice = &self.args[self.pos..self.pos + count];
        self.pos += count;
        slice
    }

    pub fn remaining(&self) -> usize {
        self.args.len() - self.pos
    }

    pub fn consumed(&self) -> usize {
        self.pos
    }
}

/// What a functional does when an interpolation error occurs.
///
/// `Raise` propagates the typed error to the caller; `Default` swallows
/// it and returns the stored value instead.
#[derive(Clone, Debug, PartialEq)]
pub enum ErrorPolicy<R> {
    Raise,
    Default(R),
}

impl<R: Clone> ErrorPolicy<R> {
    /// Route an interpolation error: either propagate it or substitute
    /// the stored default result.
    pub fn resolve(&self, error: Error) -> Result<R> {
        match self {
            ErrorPolicy::Raise => Err(error),
            ErrorPolicy::Default(value) => Ok(value.clone()),
        }
    }

    /// Map the stored default through a shape adapter (used to broadcast
    /// a plain default into a composite result).
    pub fn map<S>(&self, f: impl FnOnce(&R) -> S) -> ErrorPolicy<S> {
        match self {
            ErrorPolicy::Raise => ErrorPolicy::Raise,
            ErrorPolicy::Default(value) => ErrorPolicy::Default(f(value)),
        }
    }
}

/// A callable of a fixed number of dimensions.
///
/// `evaluate` must consume exactly `dimensions()` arguments from the
/// cursor. Plain values are zero-dimensional functionals that terminate
/// the recursion: they return themselves and consume nothing.
pub trait Functional {
    type Output: Linear;

    fn dimensions(&self) -> usize;

    /// Precompute whatever the evaluation needs (spline second
    /// derivatives, Hermite slopes, partial integrals). A no-op for
    /// methods without scratch.
    fn compile(&mut self) -> Result<()> {
        Ok(())
    }

    fn evaluate(&self, cursor: &mut ArgumentCursor<'_>) -> Result<Self::Output>;

    /// Evaluate against a full argument list, checking the count.
    fn call(&self, args: &[f64]) -> Result<Self::Output> {
        if args.len() != self.dimensions() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} arguments, got {}",
                self.dimensions(),
                args.len()
            )));
        }
        let mut cursor = ArgumentCursor::new(args);
        let out = self.evaluate(&mut cursor)?;
        debug_assert_eq!(cursor.consumed(), self.dimensions());
        Ok(out)
    }
}

/// A plain scalar is a zero-dimensional functional: evaluating it returns
/// the value unchanged without consuming any argument.
impl Functional for f64 {
    type Output = f64;

    fn dimensions(&self) -> usize {
        0
    }

    fn evaluate(&self, _cursor: &mut ArgumentCursor<'_>) -> Result<f64> {
        Ok(*self)
    }
}
