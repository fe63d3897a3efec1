//! The arithmetic closure required of every ordinate type.
//!
//! Anything can be interpolated as long as it is closed under scaling and
//! addition: plain scalars, composite results carrying derivatives, whole
//! collections, nested tables. Interpolation kernels are written once
//! against [`Linear`] and reused for all of them.

use crate::error::{Error, Result};

/// Values closed under scaling by a scalar and componentwise addition.
pub trait Linear: Clone {
    /// The additive identity with the same shape as `self`.
    fn zero_like(&self) -> Self;

    /// Multiply every component by `factor`.
    fn scale_mut(&mut self, factor: f64);

    /// `self += factor * other`, the scale-then-accumulate step of every
    /// interpolation kernel. Fails with a shape error when the operands
    /// are not structurally compatible.
    fn add_scaled(&mut self, factor: f64, other: &Self) -> Result<()>;

    /// Append all scalar components in a fixed traversal order.
    fn flatten_into(&self, out: &mut Vec<f64>);

    /// Rebuild a value of the same shape as `self` from a component
    /// stream produced by [`Linear::flatten_into`].
    fn unflatten(&self, src: &mut dyn Iterator<Item = f64>) -> Self;

    /// Number of scalar components.
    fn component_count(&self) -> usize {
        let mut buf = Vec::new();
        self.flatten_into(&mut buf);
        buf.len()
    }
}

impl Linear for f64 {
    fn zero_like(&self) -> Self {
        0.0
    }

    fn scale_mut(&mut self, factor: f64) {
        *self *= factor;
    }

    fn add_scaled(&mut self, factor: f64, other: &Self) -> Result<()> {
        *self += factor * other;
        Ok(())
    }

    fn flatten_into(&self, out: &mut Vec<f64>) {
        out.push(*self);
    }

    fn unflatten(&self, src: &mut dyn Iterator<Item = f64>) -> Self {
        src.next().expect("component stream exhausted")
    }

    fn component_count(&self) -> usize {
        1
    }
}

/// `a + s * b` as a plain function, for callers that want the
/// scale-and-add pattern without mutating in place.
pub fn scale_add<T: Linear>(a: &T, s: f64, b: &T) -> Result<T> {
    let mut out = a.clone();
    out.add_scaled(s, b)?;
    Ok(out)
}

pub(crate) fn shape_error(what: &str) -> Error {
    Error::ShapeMismatch(what.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_ops() {
        let mut x = 2.0;
        x.scale_mut(3.0);
        x.add_scaled(-1.0, &1.5).unwrap();
        assert_eq!(x, 4.5);
        assert_eq!(1.25_f64.zero_like(), 0.0);
    }

    #[test]
    fn scalar_flatten_round_trip() {
        let mut buf = Vec::new();
        (-0.0_f64).flatten_into(&mut buf);
        assert_eq!(buf.len(), 1);
        let rebuilt = 0.0_f64.unflatten(&mut buf.into_iter());
        assert_eq!(rebuilt.to_bits(), (-0.0_f64).to_bits());
    }

    #[test]
    fn scale_add_helper() {
        assert_eq!(scale_add(&1.0, 2.0, &3.0).unwrap(), 7.0);
    }
}
