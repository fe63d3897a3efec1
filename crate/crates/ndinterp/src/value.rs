//! Dynamically shaped ordinates and results.
//!
//! [`Node`] is one level of a nested table: a leaf collection of scalars
//! (with scratch space for compiled derivatives and partial integrals) or
//! a branch collection whose ordinates are the next level down.
//! [`Value`] is anything an evaluation can produce or a table can hold as
//! an opaque ordinate: a scalar, a whole table, or a composite result
//! wrapping further values, one layer per interpolated dimension.
//!
//! Both are closed under scaling and addition, so entire tables can be
//! blended by the same kernels that blend scalars. That is the mechanism
//! behind dimension reduction: interpolating the outer dimensions of a
//! table at fixed coordinates yields a lower-dimensional table in one go.

use crate::collection::Collection;
use crate::element::{Element, Element2D, IntegralElement};
use crate::error::{Error, Result};
use crate::linear::{shape_error, Linear};
use crate::results::{ResultHesse, ResultPdf};

/// One level of a nested table.
#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    /// Innermost level: scalar ordinates plus compile scratch.
    Leaf(Collection<IntegralElement<f64>>),
    /// Any outer level: ordinates are the next level down.
    Branch(Collection<Element2D<Node>>),
}

impl Node {
    /// An empty node tree of the given depth (1 = a single leaf level).
    pub fn empty(depth: usize, metric: crate::element::Distance) -> Node {
        debug_assert!(depth >= 1);
        if depth == 1 {
            Node::Leaf(Collection::new(metric))
        } else {
            Node::Branch(Collection::new(metric))
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Node::Leaf(c) => c.len(),
            Node::Branch(c) => c.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Nesting depth below and including this level; 1 for a leaf.
    pub fn depth(&self) -> usize {
        match self {
            Node::Leaf(_) => 1,
            Node::Branch(c) => 1 + c.first().map(|e| e.y.depth()).unwrap_or(0),
        }
    }

    /// Total number of scalar leaves.
    pub fn leaf_count(&self) -> usize {
        match self {
            Node::Leaf(c) => c.len(),
            Node::Branch(c) => c.iter().map(|e| e.y.leaf_count()).sum(),
        }
    }

    pub fn as_leaf(&self) -> Option<&Collection<IntegralElement<f64>>> {
        match self {
            Node::Leaf(c) => Some(c),
            Node::Branch(_) => None,
        }
    }

    pub fn as_leaf_mut(&mut self) -> Option<&mut Collection<IntegralElement<f64>>> {
        match self {
            Node::Leaf(c) => Some(c),
            Node::Branch(_) => None,
        }
    }

    pub fn as_branch(&self) -> Option<&Collection<Element2D<Node>>> {
        match self {
            Node::Branch(c) => Some(c),
            Node::Leaf(_) => None,
        }
    }

    pub fn as_branch_mut(&mut self) -> Option<&mut Collection<Element2D<Node>>> {
        match self {
            Node::Branch(c) => Some(c),
            Node::Leaf(_) => None,
        }
    }

    /// Abscissas of this level.
    pub fn abscissas(&self) -> Vec<f64> {
        match self {
            Node::Leaf(c) => c.abscissas(),
            Node::Branch(c) => c.abscissas(),
        }
    }

    /// Zero the compile scratch of every leaf element in the tree.
    pub fn clear_scratch(&mut self) {
        match self {
            Node::Leaf(c) => {
                for e in c.iter_mut() {
                    e.clear_scratch();
                }
            }
            Node::Branch(c) => {
                for e in c.iter_mut() {
                    e.y.clear_scratch();
                }
            }
        }
    }
}

impl Linear for Node {
    fn zero_like(&self) -> Self {
        match self {
            Node::Leaf(c) => Node::Leaf(c.zero_like()),
            Node::Branch(c) => Node::Branch(c.zero_like()),
        }
    }

    fn scale_mut(&mut self, factor: f64) {
        match self {
            Node::Leaf(c) => c.scale_mut(factor),
            Node::Branch(c) => c.scale_mut(factor),
        }
    }

    fn add_scaled(&mut self, factor: f64, other: &Self) -> Result<()> {
        match (self, other) {
            (Node::Leaf(a), Node::Leaf(b)) => a.add_scaled(factor, b),
            (Node::Branch(a), Node::Branch(b)) => a.add_scaled(factor, b),
            _ => Err(shape_error("table depths differ")),
        }
    }

    fn flatten_into(&self, out: &mut Vec<f64>) {
        match self {
            Node::Leaf(c) => c.flatten_into(out),
            Node::Branch(c) => c.flatten_into(out),
        }
    }

    fn unflatten(&self, src: &mut dyn Iterator<Item = f64>) -> Self {
        match self {
            Node::Leaf(c) => Node::Leaf(c.unflatten(src)),
            Node::Branch(c) => Node::Branch(c.unflatten(src)),
        }
    }
}

/// A dynamically shaped ordinate or evaluation result.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Scalar(f64),
    /// A whole (possibly nested) table, as produced by dimension
    /// reduction or stored behind a constant function.
    Table(Box<Node>),
    /// Value with first and second derivative along one dimension.
    Hesse(Box<ResultHesse<Value>>),
    /// Value, derivative and partial integrals along one dimension.
    Pdf(Box<ResultPdf<Value>>),
    /// Value and a fixed number of derivatives along one dimension.
    Polynome(Vec<Value>),
}

impl Value {
    /// The scalar inside, panicking on composite values. Intended for
    /// callers that know the evaluation produced a plain number.
    pub fn as_scalar(&self) -> f64 {
        match self {
            Value::Scalar(v) => *v,
            other => panic!("expected scalar value, found {}", other.kind_name()),
        }
    }

    pub fn as_hesse(&self) -> &ResultHesse<Value> {
        match self {
            Value::Hesse(h) => h,
            other => panic!("expected Hesse result, found {}", other.kind_name()),
        }
    }

    pub fn as_pdf(&self) -> &ResultPdf<Value> {
        match self {
            Value::Pdf(p) => p,
            other => panic!("expected PDF result, found {}", other.kind_name()),
        }
    }

    pub fn as_polynome(&self) -> &[Value] {
        match self {
            Value::Polynome(v) => v,
            other => panic!("expected polynome result, found {}", other.kind_name()),
        }
    }

    pub fn as_table(&self) -> &Node {
        match self {
            Value::Table(n) => n,
            other => panic!("expected table value, found {}", other.kind_name()),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Value::Scalar(_) => "scalar",
            Value::Table(_) => "table",
            Value::Hesse(_) => "hesse",
            Value::Pdf(_) => "pdf",
            Value::Polynome(_) => "polynome",
        }
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Scalar(v)
    }
}

impl Linear for Value {
    fn zero_like(&self) -> Self {
        match self {
            Value::Scalar(_) => Value::Scalar(0.0),
            Value::Table(n) => Value::Table(Box::new(n.zero_like())),
            Value::Hesse(h) => Value::Hesse(Box::new(h.zero_like())),
            Value::Pdf(p) => Value::Pdf(Box::new(p.zero_like())),
            Value::Polynome(v) => Value::Polynome(v.iter().map(Linear::zero_like).collect()),
        }
    }

    fn scale_mut(&mut self, factor: f64) {
        match self {
            Value::Scalar(v) => *v *= factor,
            Value::Table(n) => n.scale_mut(factor),
            Value::Hesse(h) => h.scale_mut(factor),
            Value::Pdf(p) => p.scale_mut(factor),
            Value::Polynome(v) => {
                for c in v {
                    c.scale_mut(factor);
                }
            }
        }
    }

    fn add_scaled(&mut self, factor: f64, other: &Self) -> Result<()> {
        match (self, other) {
            (Value::Scalar(a), Value::Scalar(b)) => {
                *a += factor * b;
                Ok(())
            }
            (Value::Table(a), Value::Table(b)) => a.add_scaled(factor, b),
            (Value::Hesse(a), Value::Hesse(b)) => a.add_scaled(factor, b),
            (Value::Pdf(a), Value::Pdf(b)) => a.add_scaled(factor, b),
            (Value::Polynome(a), Value::Polynome(b)) => {
                if a.len() != b.len() {
                    return Err(shape_error("polynome results of different order"));
                }
                for (x, y) in a.iter_mut().zip(b) {
                    x.add_scaled(factor, y)?;
                }
                Ok(())
            }
            (a, b) => Err(Error::ShapeMismatch(format!(
                "cannot combine {} with {}",
                a.kind_name(),
                b.kind_name()
            ))),
        }
    }

    fn flatten_into(&self, out: &mut Vec<f64>) {
        match self {
            Value::Scalar(v) => out.push(*v),
            Value::Table(n) => n.flatten_into(out),
            Value::Hesse(h) => h.flatten_into(out),
            Value::Pdf(p) => p.flatten_into(out),
            Value::Polynome(v) => {
                for c in v {
                    c.flatten_into(out);
                }
            }
        }
    }

    fn unflatten(&self, src: &mut dyn Iterator<Item = f64>) -> Self {
        match self {
            Value::Scalar(_) => Value::Scalar(src.next().expect("component stream exhausted")),
            Value::Table(n) => Value::Table(Box::new(n.unflatten(src))),
            Value::Hesse(h) => Value::Hesse(Box::new(h.unflatten(src))),
            Value::Pdf(p) => Value::Pdf(Box::new(p.unflatten(src))),
            Value::Polynome(v) => Value::Polynome(v.iter().map(|c| c.unflatten(src)).collect()),
        }
    }
}

/// A value is a zero-dimensional functional: evaluating it returns the
/// value itself and consumes no argument.
impl crate::functional::Functional for Value {
    type Output = Value;

    fn dimensions(&self) -> usize {
        0
    }

    fn evaluate(&self, _cursor: &mut crate::functional::ArgumentCursor<'_>) -> Result<Value> {
        Ok(self.clone())
    }
}
