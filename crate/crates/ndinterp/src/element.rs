//! Elements stored in collections and the distance operator that orders them.

use crate::error::Result;
use crate::linear::Linear;

/// Signed distance between two abscissa values.
///
/// The default metric is the arithmetic difference `second - first`:
/// positive when `second` sorts after `first`, negative the other way
/// round and zero when the two are equal. A custom metric (for periodic
/// angles, rescaled axes, ...) can be supplied as a plain function as long
/// as it keeps those properties.
///
/// `precision` is the minimal distance that still counts as "different".
/// The default is zero: any strictly positive distance separates two
/// abscissas. It is a per-instance setting, not global state, so
/// collections with different tolerances can coexist.
#[derive(Clone, Copy)]
pub struct Distance {
    precision: f64,
    metric: fn(f64, f64) -> f64,
}

fn arithmetic(first: f64, second: f64) -> f64 {
    second - first
}

impl Default for Distance {
    fn default() -> Self {
        Distance {
            precision: 0.0,
            metric: arithmetic,
        }
    }
}

impl std::fmt::Debug for Distance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Distance")
            .field("precision", &self.precision)
            .finish()
    }
}

impl PartialEq for Distance {
    fn eq(&self, other: &Self) -> bool {
        self.precision == other.precision && std::ptr::fn_addr_eq(self.metric, other.metric)
    }
}

impl Distance {
    /// Default metric with an explicit precision threshold.
    pub fn with_precision(precision: f64) -> Self {
        assert!(precision >= 0.0, "precision must be non-negative");
        Distance {
            precision,
            metric: arithmetic,
        }
    }

    /// A user-supplied metric. It must satisfy `distance(a, a) == 0`,
    /// `distance(a, b) == -distance(b, a)` and `distance(a, b) > 0`
    /// exactly when `b` sorts after `a`.
    pub fn custom(metric: fn(f64, f64) -> f64, precision: f64) -> Self {
        assert!(precision >= 0.0, "precision must be non-negative");
        Distance { precision, metric }
    }

    /// Signed distance from `first` to `second`.
    #[inline]
    pub fn distance(&self, first: f64, second: f64) -> f64 {
        (self.metric)(first, second)
    }

    #[inline]
    pub fn precision(&self) -> f64 {
        self.precision
    }

    /// Strict ordering predicate on abscissas derived from the metric.
    #[inline]
    pub fn precedes(&self, a: f64, b: f64) -> bool {
        self.distance(a, b) > 0.0
    }
}

/// One (abscissa, ordinate) pair as stored in a collection.
///
/// Implementors may carry extra scratch fields (derivatives, partial
/// integrals) that are filled by a compile pass; `clear_scratch` resets
/// those to the additive identity, which is also their state before any
/// compile.
pub trait Element: Clone {
    type Ordinate: Linear;

    fn new(x: f64, y: Self::Ordinate) -> Self;
    fn x(&self) -> f64;
    fn y(&self) -> &Self::Ordinate;
    fn y_mut(&mut self) -> &mut Self::Ordinate;

    /// Reset any derivative/integral scratch. No-op for plain elements.
    fn clear_scratch(&mut self) {}

    /// Derivative scratch, if this element type stores one.
    fn derivative(&self) -> Option<&Self::Ordinate> {
        None
    }

    fn set_derivative(&mut self, _d: Self::Ordinate) {
        panic!("element type has no derivative storage");
    }

    /// Partial-integral scratch, if this element type stores one.
    fn integral(&self) -> Option<&Self::Ordinate> {
        None
    }

    fn set_integral(&mut self, _v: Self::Ordinate) {
        panic!("element type has no integral storage");
    }
}

/// The plain element: abscissa and ordinate only.
#[derive(Clone, Debug, PartialEq)]
pub struct Element2D<Y> {
    pub x: f64,
    pub y: Y,
}

impl<Y: Linear> Element for Element2D<Y> {
    type Ordinate = Y;

    fn new(x: f64, y: Y) -> Self {
        Element2D { x, y }
    }

    fn x(&self) -> f64 {
        self.x
    }

    fn y(&self) -> &Y {
        &self.y
    }

    fn y_mut(&mut self) -> &mut Y {
        &mut self.y
    }
}

/// Element with storage for one derivative value per node: the second
/// derivative for cubic splines, the first derivative (slope) for Hermite
/// splines. `d` is the additive identity until a compile pass fills it.
#[derive(Clone, Debug, PartialEq)]
pub struct SplineElement<Y> {
    pub x: f64,
    pub y: Y,
    pub d: Y,
}

impl<Y: Linear> Element for SplineElement<Y> {
    type Ordinate = Y;

    fn new(x: f64, y: Y) -> Self {
        let d = y.zero_like();
        SplineElement { x, y, d }
    }

    fn x(&self) -> f64 {
        self.x
    }

    fn y(&self) -> &Y {
        &self.y
    }

    fn y_mut(&mut self) -> &mut Y {
        &mut self.y
    }

    fn clear_scratch(&mut self) {
        self.d = self.y.zero_like();
    }

    fn derivative(&self) -> Option<&Y> {
        Some(&self.d)
    }

    fn set_derivative(&mut self, d: Y) {
        self.d = d;
    }
}

/// Element with derivative scratch plus the cumulative partial integral
/// `v` from the minimal abscissa up to this node. The total integral of a
/// collection is the `v` of its last element.
#[derive(Clone, Debug, PartialEq)]
pub struct IntegralElement<Y> {
    pub x: f64,
    pub y: Y,
    pub d: Y,
    pub v: Y,
}

impl<Y: Linear> Element for IntegralElement<Y> {
    type Ordinate = Y;

    fn new(x: f64, y: Y) -> Self {
        let d = y.zero_like();
        let v = y.zero_like();
        IntegralElement { x, y, d, v }
    }

    fn x(&self) -> f64 {
        self.x
    }

    fn y(&self) -> &Y {
        &self.y
    }

    fn y_mut(&mut self) -> &mut Y {
        &mut self.y
    }

    fn clear_scratch(&mut self) {
        self.d = self.y.zero_like();
        self.v = self.y.zero_like();
    }

    fn derivative(&self) -> Option<&Y> {
        Some(&self.d)
    }

    fn set_derivative(&mut self, d: Y) {
        self.d = d;
    }

    fn integral(&self) -> Option<&Y> {
        Some(&self.v)
    }

    fn set_integral(&mut self, v: Y) {
        self.v = v;
    }
}

/// `true` when element `a` sorts strictly before element `b`.
pub fn precedes<E: Element>(metric: &Distance, a: &E, b: &E) -> bool {
    metric.precedes(a.x(), b.x())
}

impl<Y: Linear> Linear for Element2D<Y> {
    fn zero_like(&self) -> Self {
        Element2D {
            x: self.x,
            y: self.y.zero_like(),
        }
    }

    fn scale_mut(&mut self, factor: f64) {
        self.y.scale_mut(factor);
    }

    fn add_scaled(&mut self, factor: f64, other: &Self) -> Result<()> {
        self.y.add_scaled(factor, &other.y)
    }

    fn flatten_into(&self, out: &mut Vec<f64>) {
        self.y.flatten_into(out);
    }

    fn unflatten(&self, src: &mut dyn Iterator<Item = f64>) -> Self {
        Element2D {
            x: self.x,
            y: self.y.unflatten(src),
        }
    }
}
