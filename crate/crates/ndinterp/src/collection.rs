//! One-dimensional ordered containers: the building block of every
//! higher-dimensional structure.
//!
//! [`Collection`] keeps its elements in a contiguous vector, strictly
//! sorted by the configured [`Distance`], and locates the neighbourhood
//! of an abscissa by binary search. [`GridCollection`] holds the same
//! data but requires equidistant abscissas, which lets it compute the
//! lookup position directly instead of searching.

use crate::element::{Distance, Element};
use crate::error::{Error, Result};
use crate::linear::Linear;

/// An ordered, contiguous sequence of elements over one axis.
#[derive(Clone, Debug, PartialEq)]
pub struct Collection<E> {
    elements: Vec<E>,
    metric: Distance,
}

impl<E: Element> Default for Collection<E> {
    fn default() -> Self {
        Collection::new(Distance::default())
    }
}

impl<E: Element> Collection<E> {
    pub fn new(metric: Distance) -> Self {
        Collection {
            elements: Vec::new(),
            metric,
        }
    }

    /// Build from elements that are already strictly sorted.
    pub fn from_sorted(elements: Vec<E>, metric: Distance) -> Result<Self> {
        let c = Collection { elements, metric };
        c.check_sorted()?;
        Ok(c)
    }

    fn check_sorted(&self) -> Result<()> {
        for pair in self.elements.windows(2) {
            let d = self.metric.distance(pair[0].x(), pair[1].x());
            if d <= self.metric.precision() {
                return Err(Error::DuplicateAbscissa { x: pair[1].x() });
            }
        }
        Ok(())
    }

    pub fn metric(&self) -> &Distance {
        &self.metric
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<&E> {
        self.elements.get(index)
    }

    pub fn get_mut(&mut self, index: usize) -> Option<&mut E> {
        self.elements.get_mut(index)
    }

    pub fn first(&self) -> Option<&E> {
        self.elements.first()
    }

    pub fn last(&self) -> Option<&E> {
        self.elements.last()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, E> {
        self.elements.iter()
    }

    pub fn iter_mut(&mut self) -> std::slice::IterMut<'_, E> {
        self.elements.iter_mut()
    }

    pub fn elements(&self) -> &[E] {
        &self.elements
    }

    pub fn elements_mut(&mut self) -> &mut [E] {
        &mut self.elements
    }

    pub fn clear(&mut self) {
        self.elements.clear();
    }

    pub fn reserve(&mut self, additional: usize) {
        self.elements.reserve(additional);
    }

    /// Append an element known to sort after everything present.
    /// Used by builders and the table reader, which preserve order.
    pub(crate) fn push_back(&mut self, element: E) {
        self.elements.push(element);
    }

    pub fn abscissas(&self) -> Vec<f64> {
        self.elements.iter().map(Element::x).collect()
    }

    /// First position whose element does not sort before `x`; may be
    /// one past the end. Binary search, `O(log n)` comparisons.
    pub fn lower_bound(&self, x: f64) -> usize {
        self.elements
            .partition_point(|e| self.metric.distance(e.x(), x) > 0.0)
    }

    /// Access the ordinate at `x`, inserting a new element with the given
    /// default if no element lies within `precision` of `x`. Sorted order
    /// is preserved by construction.
    pub fn insert_or_get_with(
        &mut self,
        x: f64,
        default: impl FnOnce() -> E::Ordinate,
    ) -> &mut E::Ordinate {
        let i = self.lower_bound(x);
        let p = self.metric.precision();
        // The element at the lower bound does not sort before x; the one
        // just below it may still be within precision.
        let idx = if i < self.elements.len()
            && self.metric.distance(x, self.elements[i].x()) <= p
        {
            i
        } else if i > 0 && self.metric.distance(self.elements[i - 1].x(), x) <= p {
            i - 1
        } else {
            self.elements.insert(i, E::new(x, default()));
            i
        };
        self.elements[idx].y_mut()
    }

    /// Restore sorted order after external mutation. Duplicate abscissas
    /// (closer than `precision`) are reported as an error rather than
    /// silently merged; the collection is left sorted either way.
    pub fn sort(&mut self) -> Result<()> {
        let metric = self.metric;
        self.elements.sort_by(|a, b| {
            if metric.precedes(a.x(), b.x()) {
                std::cmp::Ordering::Less
            } else if metric.precedes(b.x(), a.x()) {
                std::cmp::Ordering::Greater
            } else {
                std::cmp::Ordering::Equal
            }
        });
        self.check_sorted()
    }

    /// Replace the contents with the axis's abscissas, ordinates supplied
    /// by `fill`.
    pub fn configure(&mut self, axis: &Axis, mut fill: impl FnMut(f64) -> E::Ordinate) -> Result<()> {
        let xs = axis.values();
        self.elements.clear();
        self.elements.reserve(xs.len());
        for x in xs {
            self.elements.push(E::new(x, fill(x)));
        }
        self.check_sorted()
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::AbscissaMismatch(format!(
                "element counts differ: {} vs {}",
                self.len(),
                other.len()
            )));
        }
        for (i, (a, b)) in self.elements.iter().zip(&other.elements).enumerate() {
            if self.metric.distance(a.x(), b.x()).abs() > self.metric.precision() {
                return Err(Error::AbscissaMismatch(format!(
                    "abscissas differ at index {i}: {} vs {}",
                    a.x(),
                    b.x()
                )));
            }
        }
        Ok(())
    }

    /// `self[i].y += factor * other[i].y` elementwise. Only collections
    /// with identical abscissas can be combined. Scratch fields are
    /// invalidated; a recompile is required before spline evaluation.
    pub fn add_scaled_assign(&mut self, factor: f64, other: &Self) -> Result<()> {
        self.check_compatible(other)?;
        for (a, b) in self.elements.iter_mut().zip(&other.elements) {
            a.y_mut().add_scaled(factor, b.y())?;
            a.clear_scratch();
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        out.add_scaled_assign(1.0, other)?;
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        out.add_scaled_assign(-1.0, other)?;
        Ok(out)
    }

    /// Multiply every ordinate by `factor`. Scratch fields are invalidated.
    pub fn scale(&mut self, factor: f64) {
        for e in &mut self.elements {
            e.y_mut().scale_mut(factor);
            e.clear_scratch();
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.scale(factor);
        out
    }
}

impl<E: Element> Linear for Collection<E> {
    fn zero_like(&self) -> Self {
        let mut out = self.clone();
        for e in &mut out.elements {
            let z = e.y().zero_like();
            *e.y_mut() = z;
            e.clear_scratch();
        }
        out
    }

    fn scale_mut(&mut self, factor: f64) {
        self.scale(factor);
    }

    fn add_scaled(&mut self, factor: f64, other: &Self) -> Result<()> {
        self.add_scaled_assign(factor, other)
    }

    fn flatten_into(&self, out: &mut Vec<f64>) {
        for e in &self.elements {
            e.y().flatten_into(out);
        }
    }

    fn unflatten(&self, src: &mut dyn Iterator<Item = f64>) -> Self {
        let mut out = self.clone();
        for e in &mut out.elements {
            let y = e.y().unflatten(src);
            *e.y_mut() = y;
            e.clear_scratch();
        }
        out
    }
}

/// Node index for degree-0 lookup against a collection: an exact hit
/// (within precision) maps to its node, anything strictly between nodes
/// maps to the lower one.
pub(crate) fn floor_lookup<E: Element>(c: &Collection<E>, lower: usize, x: f64) -> usize {
    let hit = c
        .get(lower)
        .is_some_and(|e| c.metric().distance(x, e.x()) <= c.metric().precision());
    if hit {
        lower
    } else {
        lower.saturating_sub(1)
    }
}

/// Out-of-range check extended by precision: an abscissa qualifies when
/// it lies in `[first - precision, last + precision]`.
pub(crate) fn check_range<E: Element>(c: &Collection<E>, x: f64) -> Result<()> {
    let first = c.first().expect("range check on empty collection").x();
    let last = c.last().unwrap().x();
    let m = c.metric();
    if m.distance(x, first) > m.precision() || m.distance(last, x) > m.precision() {
        return Err(Error::out_of_range(x, first, last));
    }
    Ok(())
}

/// Relative tolerance for the equidistance check of grid collections.
pub const GRID_TOLERANCE: f64 = 1e-9;

/// Relative tolerance with which the direct grid index computation snaps
/// to a node, so that exact node hits agree with binary search.
pub const GRID_SNAP: f64 = 1e-12;

/// Check that the abscissas are equidistant within [`GRID_TOLERANCE`].
pub fn is_equidistant<E: Element>(collection: &Collection<E>) -> bool {
    let n = collection.len();
    if n < 2 {
        return n == 1;
    }
    let metric = collection.metric();
    let span = metric.distance(collection.first().unwrap().x(), collection.last().unwrap().x());
    let step = span / (n - 1) as f64;
    if step.is_nan() || step <= 0.0 {
        return false;
    }
    collection.elements().windows(2).all(|pair| {
        let d = metric.distance(pair[0].x(), pair[1].x());
        (d - step).abs() <= GRID_TOLERANCE * step.abs()
    })
}

/// Direct lookup position for equidistant abscissas:
/// `ceil(distance(xmin, x) / step)`, snapped to the nearest integer
/// within [`GRID_SNAP`] so exact node hits map to themselves, then
/// clamped to `[0, n]`. Agrees with [`Collection::lower_bound`] for
/// every position a binary search can return.
pub fn grid_lower_bound<E: Element>(collection: &Collection<E>, x: f64) -> usize {
    let n = collection.len();
    if n == 0 {
        return 0;
    }
    let metric = collection.metric();
    let x0 = collection.first().unwrap().x();
    if n == 1 {
        return if metric.distance(x0, x) > 0.0 { 1 } else { 0 };
    }
    let span = metric.distance(x0, collection.last().unwrap().x());
    let t = metric.distance(x0, x) * (n - 1) as f64 / span;
    let nearest = t.round();
    let t = if (t - nearest).abs() <= GRID_SNAP * nearest.abs().max(1.0) {
        nearest
    } else {
        t
    };
    t.ceil().clamp(0.0, n as f64) as usize
}

/// A collection whose abscissas are equidistant, permitting direct index
/// computation instead of binary search. Storage, arithmetic and
/// serialized form are identical to [`Collection`].
#[derive(Clone, Debug, PartialEq)]
pub struct GridCollection<E> {
    inner: Collection<E>,
}

impl<E: Element> GridCollection<E> {
    /// Wrap an existing collection, checking equidistance.
    pub fn from_collection(inner: Collection<E>) -> Result<Self> {
        if inner.len() < 2 {
            return Err(Error::too_few(2, inner.len()));
        }
        if !is_equidistant(&inner) {
            return Err(Error::ShapeMismatch(
                "grid collection requires equidistant abscissas".to_string(),
            ));
        }
        Ok(GridCollection { inner })
    }

    /// Sample a grid axis.
    pub fn configure(
        axis: &Axis,
        metric: Distance,
        fill: impl FnMut(f64) -> E::Ordinate,
    ) -> Result<Self> {
        let mut inner = Collection::new(metric);
        inner.configure(axis, fill)?;
        GridCollection::from_collection(inner)
    }

    pub fn as_collection(&self) -> &Collection<E> {
        &self.inner
    }

    pub fn into_collection(self) -> Collection<E> {
        self.inner
    }

    pub fn len(&self) -> usize {
        self.inner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inner.is_empty()
    }

    pub fn lower_bound(&self, x: f64) -> usize {
        grid_lower_bound(&self.inner, x)
    }

    /// Map-style access, as for a plain collection. Inserting an
    /// abscissa off the grid breaks the equidistance invariant;
    /// [`GridCollection::revalidate`] checks it.
    pub fn insert_or_get_with(
        &mut self,
        x: f64,
        default: impl FnOnce() -> E::Ordinate,
    ) -> &mut E::Ordinate {
        self.inner.insert_or_get_with(x, default)
    }

    pub fn revalidate(&self) -> Result<()> {
        if self.inner.len() < 2 {
            return Err(Error::too_few(2, self.inner.len()));
        }
        if !is_equidistant(&self.inner) {
            return Err(Error::ShapeMismatch(
                "grid collection requires equidistant abscissas".to_string(),
            ));
        }
        Ok(())
    }
}

/// Uniform access to a collection plus its search strategy. Lets the
/// interpolators work over sorted and grid collections alike.
pub trait Lookup<E: Element> {
    fn collection(&self) -> &Collection<E>;
    fn collection_mut(&mut self) -> &mut Collection<E>;
    fn lower_bound(&self, x: f64) -> usize;
}

impl<E: Element> Lookup<E> for Collection<E> {
    fn collection(&self) -> &Collection<E> {
        self
    }

    fn collection_mut(&mut self) -> &mut Collection<E> {
        self
    }

    fn lower_bound(&self, x: f64) -> usize {
        Collection::lower_bound(self, x)
    }
}

impl<E: Element> Lookup<E> for GridCollection<E> {
    fn collection(&self) -> &Collection<E> {
        &self.inner
    }

    fn collection_mut(&mut self) -> &mut Collection<E> {
        &mut self.inner
    }

    fn lower_bound(&self, x: f64) -> usize {
        GridCollection::lower_bound(self, x)
    }
}

/// An abstract sequence of abscissa values used to configure collections:
/// either an explicit sorted set or an equidistant grid.
#[derive(Clone, Debug, PartialEq)]
pub enum Axis {
    Set(Vec<f64>),
    Grid { n: usize, min: f64, max: f64 },
}

impl Axis {
    /// An equidistant axis of `n >= 2` nodes spanning `[min, max]`.
    pub fn grid(n: usize, min: f64, max: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::ShapeMismatch(format!(
                "grid axis requires at least 2 nodes, got {n}"
            )));
        }
        if min.is_nan() || max.is_nan() || min >= max {
            return Err(Error::ShapeMismatch(format!(
                "grid axis requires min < max, got [{min}, {max}]"
            )));
        }
        Ok(Axis::Grid { n, min, max })
    }

    /// An explicit, strictly increasing list of abscissas.
    pub fn set(values: Vec<f64>) -> Result<Self> {
        for pair in values.windows(2) {
            if pair[1] == pair[0] {
                return Err(Error::DuplicateAbscissa { x: pair[0] });
            }
            if pair[1] < pair[0] {
                return Err(Error::ShapeMismatch(
                    "set axis must be strictly increasing".to_string(),
                ));
            }
        }
        Ok(Axis::Set(values))
    }

    pub fn len(&self) -> usize {
        match self {
            Axis::Set(v) => v.len(),
            Axis::Grid { n, .. } => *n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Materialize the abscissa sequence. Grid nodes are computed by
    /// linear blending so both endpoints are exact.
    pub fn values(&self) -> Vec<f64> {
        match self {
            Axis::Set(v) => v.clone(),
            Axis::Grid { n, min, max } => (0..*n)
                .map(|i| {
                    let t = i as f64 / (*n - 1) as f64;
                    min * (1.0 - t) + max * t
                })
                .collect(),
        }
    }
}
