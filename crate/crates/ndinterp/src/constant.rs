//! A one-dimensional function with a constant return value.
//!
//! The stored value can be anything with arithmetic capabilities,
//! including a whole lower-dimensional table. Composing a constant
//! function under interpolating map levels is what lowers the number of
//! dimensions of a multi-dimensional function: the maps blend entire
//! stored tables instead of scalars.

use crate::error::Result;
use crate::functional::{ArgumentCursor, Functional};
use crate::linear::Linear;

/// Consumes one argument, ignores it, and returns the value set at
/// construction.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstantFunction1D<R> {
    y: R,
}

impl<R: Linear> ConstantFunction1D<R> {
    pub fn new(y: R) -> Self {
        ConstantFunction1D { y }
    }

    pub fn value(&self) -> &R {
        &self.y
    }
}

impl<R: Linear> Functional for ConstantFunction1D<R> {
    type Output = R;

    fn dimensions(&self) -> usize {
        1
    }

    fn evaluate(&self, cursor: &mut ArgumentCursor<'_>) -> Result<R> {
        cursor.next_argument();
        Ok(self.y.clone())
    }
}
