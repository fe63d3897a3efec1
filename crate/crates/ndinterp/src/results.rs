//! Composite result types carrying derivatives and partial integrals.
//!
//! All of them are closed under scaling and addition, so they can be
//! interpolated like any other ordinate. Because they are generic over
//! their component type, they nest: a 3D interpolation with the Hesse
//! result in every dimension produces a
//! `ResultHesse<ResultHesse<ResultHesse<f64>>>`, from which the full
//! Hessian matrix can be read off field by field.

use crate::error::Result;
use crate::linear::{shape_error, Linear};

/// Function value with first and second derivative.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultHesse<T> {
    pub f: T,
    pub fp: T,
    pub fpp: T,
}

impl<T> ResultHesse<T> {
    pub fn new(f: T, fp: T, fpp: T) -> Self {
        ResultHesse { f, fp, fpp }
    }
}

impl<T: Clone> ResultHesse<T> {
    /// Every component set to the same value.
    pub fn splat(value: T) -> Self {
        ResultHesse {
            f: value.clone(),
            fp: value.clone(),
            fpp: value,
        }
    }
}

impl<T: Linear> Linear for ResultHesse<T> {
    fn zero_like(&self) -> Self {
        ResultHesse {
            f: self.f.zero_like(),
            fp: self.fp.zero_like(),
            fpp: self.fpp.zero_like(),
        }
    }

    fn scale_mut(&mut self, factor: f64) {
        self.f.scale_mut(factor);
        self.fp.scale_mut(factor);
        self.fpp.scale_mut(factor);
    }

    fn add_scaled(&mut self, factor: f64, other: &Self) -> Result<()> {
        self.f.add_scaled(factor, &other.f)?;
        self.fp.add_scaled(factor, &other.fp)?;
        self.fpp.add_scaled(factor, &other.fpp)
    }

    fn flatten_into(&self, out: &mut Vec<f64>) {
        self.f.flatten_into(out);
        self.fp.flatten_into(out);
        self.fpp.flatten_into(out);
    }

    fn unflatten(&self, src: &mut dyn Iterator<Item = f64>) -> Self {
        ResultHesse {
            f: self.f.unflatten(src),
            fp: self.fp.unflatten(src),
            fpp: self.fpp.unflatten(src),
        }
    }
}

/// Function value, first derivative, partial integral `v` from the start
/// of the range up to `x`, and `total` over the full range.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultPdf<T> {
    pub f: T,
    pub fp: T,
    pub v: T,
    pub total: T,
}

impl<T> ResultPdf<T> {
    pub fn new(f: T, fp: T, v: T, total: T) -> Self {
        ResultPdf { f, fp, v, total }
    }
}

impl<T: Clone> ResultPdf<T> {
    pub fn splat(value: T) -> Self {
        ResultPdf {
            f: value.clone(),
            fp: value.clone(),
            v: value.clone(),
            total: value,
        }
    }
}

impl<T: Linear> Linear for ResultPdf<T> {
    fn zero_like(&self) -> Self {
        ResultPdf {
            f: self.f.zero_like(),
            fp: self.fp.zero_like(),
            v: self.v.zero_like(),
            total: self.total.zero_like(),
        }
    }

    fn scale_mut(&mut self, factor: f64) {
        self.f.scale_mut(factor);
        self.fp.scale_mut(factor);
        self.v.scale_mut(factor);
        self.total.scale_mut(factor);
    }

    fn add_scaled(&mut self, factor: f64, other: &Self) -> Result<()> {
        self.f.add_scaled(factor, &other.f)?;
        self.fp.add_scaled(factor, &other.fp)?;
        self.v.add_scaled(factor, &other.v)?;
        self.total.add_scaled(factor, &other.total)
    }

    fn flatten_into(&self, out: &mut Vec<f64>) {
        self.f.flatten_into(out);
        self.fp.flatten_into(out);
        self.v.flatten_into(out);
        self.total.flatten_into(out);
    }

    fn unflatten(&self, src: &mut dyn Iterator<Item = f64>) -> Self {
        ResultPdf {
            f: self.f.unflatten(src),
            fp: self.fp.unflatten(src),
            v: self.v.unflatten(src),
            total: self.total.unflatten(src),
        }
    }
}

/// Function value and its first `N` derivatives: `y[k]` is the k-th
/// derivative, `y[0]` the value itself.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultPolynome<T> {
    pub y: Vec<T>,
}

impl<T> ResultPolynome<T> {
    pub fn new(y: Vec<T>) -> Self {
        ResultPolynome { y }
    }

    /// Highest derivative order carried.
    pub fn order(&self) -> usize {
        self.y.len().saturating_sub(1)
    }
}

impl<T: Linear> Linear for ResultPolynome<T> {
    fn zero_like(&self) -> Self {
        ResultPolynome {
            y: self.y.iter().map(Linear::zero_like).collect(),
        }
    }

    fn scale_mut(&mut self, factor: f64) {
        for c in &mut self.y {
            c.scale_mut(factor);
        }
    }

    fn add_scaled(&mut self, factor: f64, other: &Self) -> Result<()> {
        if self.y.len() != other.y.len() {
            return Err(shape_error(&format!(
                "polynome results of order {} and {}",
                self.order(),
                other.order()
            )));
        }
        for (c, o) in self.y.iter_mut().zip(&other.y) {
            c.add_scaled(factor, o)?;
        }
        Ok(())
    }

    fn flatten_into(&self, out: &mut Vec<f64>) {
        for c in &self.y {
            c.flatten_into(out);
        }
    }

    fn unflatten(&self, src: &mut dyn Iterator<Item = f64>) -> Self {
        ResultPolynome {
            y: self.y.iter().map(|c| c.unflatten(src)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear::scale_add;

    #[test]
    fn hesse_scale_add() {
        let a = ResultHesse::new(1.0, 2.0, 3.0);
        let b = ResultHesse::new(4.0, 5.0, 6.0);
        let sum = scale_add(&a, 1.0, &b).unwrap();
        assert_eq!(sum, ResultHesse::new(5.0, 7.0, 9.0));
    }

    #[test]
    fn pdf_cancels_to_zero() {
        let a = ResultPdf::new(1.0, 1.0, 1.0, 1.0);
        let zero = scale_add(&a, -1.0, &a).unwrap();
        assert_eq!(zero, ResultPdf::new(0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn polynome_scaling() {
        let mut p = ResultPolynome::new(vec![1.0, 0.0, 0.0]);
        p.scale_mut(3.0);
        assert_eq!(p.y, vec![3.0, 0.0, 0.0]);
    }

    #[test]
    fn polynome_order_mismatch_is_shape_error() {
        let mut a = ResultPolynome::new(vec![1.0, 2.0]);
        let b = ResultPolynome::new(vec![1.0, 2.0, 3.0]);
        assert!(matches!(
            a.add_scaled(1.0, &b),
            Err(crate::error::Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn nested_hesse_flatten_round_trip() {
        let nested = ResultHesse::new(
            ResultHesse::new(1.0, 2.0, 3.0),
            ResultHesse::new(4.0, 5.0, 6.0),
            ResultHesse::new(7.0, 8.0, 9.0),
        );
        let mut buf = Vec::new();
        nested.flatten_into(&mut buf);
        assert_eq!(buf.len(), 9);
        let rebuilt = nested.unflatten(&mut buf.into_iter());
        assert_eq!(rebuilt, nested);
    }
}
