//! Multi-dimensional interpolation: a base functional composed under a
//! list of interpolating map levels, one per dimension.
//!
//! Each level owns a method descriptor (search strategy, interpolation
//! method, result kind). Evaluation consumes one argument per level: a
//! map level recursively evaluates the lower-dimensional interpolants at
//! the nodes it needs, then applies its own 1D method to those results.
//! Spline and Hermite levels determine their derivatives during the
//! interpolation; only the innermost collections carry compiled scratch.
//!
//! The base of the stack is either a 1D leaf method, a constant (which
//! returns whole stored values and consumes one ignored argument), or a
//! whole composed [`MultiFunction`] — the latter is how dimensions are
//! added to an existing interpolator without rebuilding it.

use crate::collection::{check_range, grid_lower_bound, is_equidistant, Axis, Collection};
use crate::element::{Distance, Element2D, IntegralElement};
use crate::error::{Error, Result};
use crate::functional::{ArgumentCursor, ErrorPolicy, Functional};
use crate::hermite::HermiteSplineFunction;
use crate::kernel;
use crate::linear::Linear;
use crate::multimap::MultiMap;
use crate::polint::{PolintFunction, MAX_DEGREE};
use crate::results::{ResultHesse, ResultPdf};
use crate::spline::SplineFunction;
use crate::value::{Node, Value};

/// How a level locates the neighbourhood of an abscissa.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Search {
    /// Binary search over sorted abscissas.
    Sorted,
    /// Direct index computation; requires equidistant abscissas.
    Grid,
}

/// The interpolation method of one level.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Polynomial interpolation of the given degree (0 = lookup table,
    /// 1 = linear).
    Polint(usize),
    /// Natural cubic spline.
    Spline,
    /// Monotonicity-preserving cubic Hermite spline.
    Hermite,
}

impl Method {
    /// Minimal number of nodes the method can interpolate over.
    pub fn min_points(&self) -> usize {
        match self {
            Method::Polint(degree) => degree + 1,
            Method::Spline => 3,
            Method::Hermite => 2,
        }
    }
}

/// What a level produces on top of the plain interpolated value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ResultKind {
    Scalar,
    /// Value plus first and second derivative along this dimension.
    Hesse,
    /// Value, derivative and partial integrals along this dimension.
    Pdf,
    /// Value plus a fixed number of derivatives (polynomial methods only).
    Polynome(usize),
}

/// Search strategy, method and result kind of one dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MethodDescriptor {
    pub search: Search,
    pub method: Method,
    pub kind: ResultKind,
}

impl MethodDescriptor {
    pub fn new(search: Search, method: Method, kind: ResultKind) -> Result<Self> {
        if let Method::Polint(degree) = method {
            if degree > MAX_DEGREE {
                return Err(Error::ShapeMismatch(format!(
                    "polynomial degree {degree} exceeds the supported maximum {MAX_DEGREE}"
                )));
            }
        }
        if let ResultKind::Polynome(order) = kind {
            match method {
                Method::Polint(degree) if order <= degree => {}
                _ => {
                    return Err(Error::ShapeMismatch(
                        "polynome results require a polynomial method of at least that degree"
                            .to_string(),
                    ))
                }
            }
        }
        Ok(MethodDescriptor {
            search,
            method,
            kind,
        })
    }

    /// Parse a descriptor string: `sorted` or `grid`, a method
    /// (`polint0`..`polint3`, `spline`, `hermite`) and an optional result
    /// suffix (`h` for Hesse, `pdf` for partial integrals), separated by
    /// colons. Examples: `grid:polint3`, `sorted:spline:h`. Higher
    /// polynomial degrees (up to 7) are available through
    /// [`MethodDescriptor::new`]; the string grammar stays at the named
    /// wrappers.
    pub fn parse(text: &str) -> Result<Self> {
        let bad = |what: &str| Error::ShapeMismatch(format!("{what} in method spec '{text}'"));
        let mut parts = text.split(':');
        let search = match parts.next() {
            Some("sorted") => Search::Sorted,
            Some("grid") => Search::Grid,
            _ => return Err(bad("unknown search strategy")),
        };
        let method = match parts.next() {
            Some("spline") => Method::Spline,
            Some("hermite") => Method::Hermite,
            Some("polint0") => Method::Polint(0),
            Some("polint1") => Method::Polint(1),
            Some("polint2") => Method::Polint(2),
            Some("polint3") => Method::Polint(3),
            _ => return Err(bad("unknown method")),
        };
        let kind = match parts.next() {
            None => ResultKind::Scalar,
            Some("h") => ResultKind::Hesse,
            Some("pdf") => ResultKind::Pdf,
            Some(_) => return Err(bad("unknown result suffix")),
        };
        if parts.next().is_some() {
            return Err(bad("trailing fields"));
        }
        MethodDescriptor::new(search, method, kind)
    }

    fn with_kind(mut self, kind: ResultKind) -> Self {
        self.kind = kind;
        self
    }
}

impl std::fmt::Display for MethodDescriptor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.search {
            Search::Sorted => write!(f, "sorted:")?,
            Search::Grid => write!(f, "grid:")?,
        }
        match self.method {
            Method::Polint(d) => write!(f, "polint{d}")?,
            Method::Spline => write!(f, "spline")?,
            Method::Hermite => write!(f, "hermite")?,
        }
        match self.kind {
            ResultKind::Scalar => Ok(()),
            ResultKind::Hesse => write!(f, ":h"),
            ResultKind::Pdf => write!(f, ":pdf"),
            ResultKind::Polynome(m) => write!(f, ":poly{m}"),
        }
    }
}

/// The innermost functional of a method stack.
#[derive(Clone, Debug, PartialEq)]
pub enum BaseSpec {
    /// A 1D interpolation applied to the innermost collections.
    Leaf(MethodDescriptor),
    /// Returns the stored leaf value unchanged, consuming one ignored
    /// argument. The stored value may be a whole table.
    Constant,
    /// A composed lower-dimensional method stack.
    Composed(Box<StackSpec>),
}

/// A method stack: descriptors for the outer map levels plus the base
/// functional they terminate in.
#[derive(Clone, Debug, PartialEq)]
pub struct StackSpec {
    pub maps: Vec<MethodDescriptor>,
    pub base: BaseSpec,
}

impl StackSpec {
    /// A flat stack: one descriptor per dimension, the last one acting
    /// as the innermost 1D method.
    pub fn flat(mut descriptors: Vec<MethodDescriptor>) -> Result<Self> {
        let leaf = descriptors
            .pop()
            .ok_or_else(|| Error::ShapeMismatch("empty method stack".to_string()))?;
        Ok(StackSpec {
            maps: descriptors,
            base: BaseSpec::Leaf(leaf),
        })
    }

    /// Total number of dimensions: the map levels plus the base.
    pub fn dims(&self) -> usize {
        self.maps.len()
            + match &self.base {
                BaseSpec::Leaf(_) | BaseSpec::Constant => 1,
                BaseSpec::Composed(inner) => inner.dims(),
            }
    }

    /// Nesting depth of the table this stack operates on. A constant
    /// base consumes an argument without a table level of its own.
    pub fn table_depth(&self) -> usize {
        self.maps.len()
            + match &self.base {
                BaseSpec::Leaf(_) => 1,
                BaseSpec::Constant => 0,
                BaseSpec::Composed(inner) => inner.table_depth(),
            }
    }

    /// All map-level descriptors, flattened through composed bases.
    fn map_descriptors(&self) -> Vec<MethodDescriptor> {
        let mut out = self.maps.clone();
        if let BaseSpec::Composed(inner) = &self.base {
            out.extend(inner.map_descriptors());
        }
        out
    }

    /// The stack that remains after fixing the `k` outermost dimensions.
    fn drop_outer(&self, k: usize) -> StackSpec {
        if k <= self.maps.len() {
            StackSpec {
                maps: self.maps[k..].to_vec(),
                base: self.base.clone(),
            }
        } else {
            match &self.base {
                BaseSpec::Composed(inner) => inner.drop_outer(k - self.maps.len()),
                _ => unreachable!("drop_outer past the base"),
            }
        }
    }
}

/// Per-level operation counters filled during an instrumented evaluation.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LevelStats {
    /// Lower-bound lookups performed at this level.
    pub searches: u64,
    /// 1D interpolations applied to inner results at this level.
    pub blends: u64,
}

/// Operation counts per dimension level.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EvalStats {
    pub levels: Vec<LevelStats>,
}

impl EvalStats {
    pub fn new(dims: usize) -> Self {
        EvalStats {
            levels: vec![LevelStats::default(); dims],
        }
    }

    fn record_search(&mut self, level: usize) {
        self.levels[level].searches += 1;
    }

    fn record_blend(&mut self, level: usize) {
        self.levels[level].blends += 1;
    }

    pub fn total_blends(&self) -> u64 {
        self.levels.iter().map(|l| l.blends).sum()
    }
}

#[derive(Clone, Debug)]
enum TableData {
    Tree(MultiMap),
    /// A stack reduced all the way down to a bare constant.
    Const(Value),
}

/// A multi-dimensional interpolation: a method stack over a nested table.
#[derive(Clone, Debug)]
pub struct MultiFunction {
    spec: StackSpec,
    table: TableData,
    policy: ErrorPolicy<Value>,
    metric: Distance,
    compiled: bool,
}

impl MultiFunction {
    /// An empty function for the given stack; build it with
    /// [`MultiFunction::insert`] or [`MultiFunction::configure`].
    pub fn new(spec: StackSpec, metric: Distance) -> Self {
        let depth = spec.table_depth();
        let table = if depth == 0 {
            TableData::Const(Value::Scalar(0.0))
        } else {
            TableData::Tree(MultiMap::with_metric(depth, metric))
        };
        MultiFunction {
            spec,
            table,
            policy: ErrorPolicy::Raise,
            metric,
            compiled: false,
        }
    }

    /// A flat stack (one descriptor per dimension) over an existing map.
    pub fn from_parts(descriptors: Vec<MethodDescriptor>, map: MultiMap) -> Result<Self> {
        let spec = StackSpec::flat(descriptors)?;
        MultiFunction::with_spec(spec, map)
    }

    /// An arbitrary stack over an existing map. The map's depth must
    /// match the stack's table depth.
    pub fn with_spec(spec: StackSpec, map: MultiMap) -> Result<Self> {
        if spec.table_depth() != map.dims() {
            return Err(Error::ShapeMismatch(format!(
                "method stack needs a table of depth {}, map has {}",
                spec.table_depth(),
                map.dims()
            )));
        }
        let metric = *map.metric();
        Ok(MultiFunction {
            spec,
            table: TableData::Tree(map),
            policy: ErrorPolicy::Raise,
            metric,
            compiled: false,
        })
    }

    /// A bare constant functional of one dimension.
    pub fn constant(value: Value) -> Self {
        MultiFunction {
            spec: StackSpec {
                maps: Vec::new(),
                base: BaseSpec::Constant,
            },
            table: TableData::Const(value),
            policy: ErrorPolicy::Raise,
            metric: Distance::default(),
            compiled: false,
        }
    }

    /// Compose an existing function under `maps` additional outer
    /// dimensions. The result is empty (build it like any other function)
    /// unless `maps` is empty, in which case it is the base unchanged.
    pub fn expanded(maps: Vec<MethodDescriptor>, base: &MultiFunction) -> Self {
        if maps.is_empty() {
            return base.clone();
        }
        let spec = StackSpec {
            maps,
            base: BaseSpec::Composed(Box::new(base.spec.clone())),
        };
        MultiFunction::new(spec, base.metric)
    }

    /// Total number of dimensions (arguments consumed per evaluation).
    pub fn dims(&self) -> usize {
        self.spec.dims()
    }

    pub fn spec(&self) -> &StackSpec {
        &self.spec
    }

    pub fn set_policy(&mut self, policy: ErrorPolicy<Value>) {
        self.policy = policy;
    }

    /// The underlying table, when the function is backed by one.
    pub fn table(&self) -> Option<&MultiMap> {
        match &self.table {
            TableData::Tree(map) => Some(map),
            TableData::Const(_) => None,
        }
    }

    pub fn is_compiled(&self) -> bool {
        self.compiled
    }

    /// Ordinate handle at a full table key (one abscissa per table
    /// level). Invalidates any previous compile.
    pub fn insert(&mut self, key: &[f64]) -> &mut f64 {
        self.compiled = false;
        match &mut self.table {
            TableData::Tree(map) => map.insert(key),
            TableData::Const(_) => panic!("cannot insert into a constant functional"),
        }
    }

    /// Populate the full tensor product of the axes (one per table level).
    pub fn configure(&mut self, axes: &[Axis], fill: impl FnMut(&[f64]) -> f64) -> Result<()> {
        self.compiled = false;
        match &mut self.table {
            TableData::Tree(map) => map.configure(axes, fill),
            TableData::Const(_) => Err(Error::ShapeMismatch(
                "cannot configure a constant functional".to_string(),
            )),
        }
    }

    /// Validate the structure and fill every piece of compile scratch:
    /// spline second derivatives, Hermite slopes and partial integrals of
    /// the innermost collections at every combination of outer keys.
    /// Idempotent; required before evaluation.
    pub fn compile_all(&mut self) -> Result<()> {
        match &mut self.table {
            TableData::Const(_) => {}
            TableData::Tree(map) => {
                let spec = self.spec.clone();
                let mut path = Vec::new();
                compile_node(&spec.maps, &spec.base, map.root_mut(), 0, &mut path)?;
            }
        }
        self.compiled = true;
        Ok(())
    }

    /// Evaluate at one argument per dimension.
    pub fn evaluate(&self, args: &[f64]) -> Result<Value> {
        let mut stats = EvalStats::new(self.dims());
        self.evaluate_with_stats(args, &mut stats)
    }

    /// Evaluate while counting per-level search and blend operations.
    pub fn evaluate_with_stats(&self, args: &[f64], stats: &mut EvalStats) -> Result<Value> {
        assert!(self.compiled, "multi-function evaluated before compile");
        if args.len() != self.dims() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} arguments, got {}",
                self.dims(),
                args.len()
            )));
        }
        match &self.table {
            TableData::Const(value) => Ok(value.clone()),
            TableData::Tree(map) => eval_stack(
                &self.spec.maps,
                &self.spec.base,
                Slot::Tree(map.root()),
                args,
                0,
                &self.policy,
                stats,
            ),
        }
    }

    /// Fix the `k` outermost coordinates and return the standalone
    /// `(dims - k)`-dimensional function obtained by interpolating the
    /// whole lower-dimensional table at those coordinates. The result is
    /// compiled and evaluates without any outer-level work.
    pub fn reduce(&self, outer: &[f64]) -> Result<MultiFunction> {
        assert!(self.compiled, "multi-function reduced before compile");
        let k = outer.len();
        if k == 0 {
            return Ok(self.clone());
        }
        if k >= self.dims() {
            return Err(Error::ShapeMismatch(format!(
                "cannot fix {k} of {} dimensions",
                self.dims()
            )));
        }
        let map = match &self.table {
            TableData::Tree(map) => map,
            TableData::Const(_) => {
                return Err(Error::ShapeMismatch(
                    "cannot reduce a constant functional".to_string(),
                ))
            }
        };
        // Blend the outer table levels with the level methods, result
        // kinds forced to plain values: the product is a table, not a
        // derivative-carrying composite.
        let blend: Vec<MethodDescriptor> = self
            .spec
            .map_descriptors()
            .into_iter()
            .take(k)
            .map(|d| d.with_kind(ResultKind::Scalar))
            .collect();
        let mut args = outer.to_vec();
        args.push(0.0); // consumed and ignored by the constant terminal
        let mut stats = EvalStats::new(k + 1);
        let value = eval_stack(
            &blend,
            &BaseSpec::Constant,
            Slot::Tree(map.root()),
            &args,
            0,
            &self.policy,
            &mut stats,
        )?;
        let remaining = self.spec.drop_outer(k);
        let table = match value {
            Value::Table(node) => {
                TableData::Tree(MultiMap::from_root(remaining.table_depth(), *node, self.metric)?)
            }
            other => TableData::Const(other),
        };
        let mut out = MultiFunction {
            spec: remaining,
            table,
            policy: self.policy.clone(),
            metric: self.metric,
            compiled: false,
        };
        out.compile_all()?;
        Ok(out)
    }
}

impl Functional for MultiFunction {
    type Output = Value;

    fn dimensions(&self) -> usize {
        self.dims()
    }

    fn compile(&mut self) -> Result<()> {
        self.compile_all()
    }

    fn evaluate(&self, cursor: &mut ArgumentCursor<'_>) -> Result<Value> {
        let args = cursor.take(self.dims());
        let mut stats = EvalStats::new(self.dims());
        match &self.table {
            TableData::Const(value) => {
                assert!(self.compiled, "multi-function evaluated before compile");
                Ok(value.clone())
            }
            TableData::Tree(map) => {
                assert!(self.compiled, "multi-function evaluated before compile");
                eval_stack(
                    &self.spec.maps,
                    &self.spec.base,
                    Slot::Tree(map.root()),
                    args,
                    0,
                    &self.policy,
                    &mut stats,
                )
            }
        }
    }
}

/// Route interpolation errors through the policy; structural errors
/// always propagate.
fn route(policy: &ErrorPolicy<Value>, level: usize, error: Error) -> Result<Value> {
    match error {
        Error::TooFewPoints { .. } | Error::ValueOutOfRange { .. } => {
            policy.resolve(error.at_level(level, &[]))
        }
        other => Err(other),
    }
}

/// What a map level interpolates: subtrees or leaf scalars.
#[derive(Clone, Copy)]
enum Slot<'a> {
    Tree(&'a Node),
    Scalar(f64),
}

enum LevelView<'a> {
    Scalars(&'a Collection<IntegralElement<f64>>),
    Nodes(&'a Collection<Element2D<Node>>),
}

impl<'a> LevelView<'a> {
    fn of(node: &'a Node) -> Self {
        match node {
            Node::Leaf(c) => LevelView::Scalars(c),
            Node::Branch(c) => LevelView::Nodes(c),
        }
    }

    fn len(&self) -> usize {
        match self {
            LevelView::Scalars(c) => c.len(),
            LevelView::Nodes(c) => c.len(),
        }
    }

    fn metric(&self) -> Distance {
        match self {
            LevelView::Scalars(c) => *c.metric(),
            LevelView::Nodes(c) => *c.metric(),
        }
    }

    fn x(&self, i: usize) -> f64 {
        match self {
            LevelView::Scalars(c) => c.get(i).unwrap().x,
            LevelView::Nodes(c) => c.get(i).unwrap().x,
        }
    }

    fn abscissas(&self) -> Vec<f64> {
        match self {
            LevelView::Scalars(c) => c.abscissas(),
            LevelView::Nodes(c) => c.abscissas(),
        }
    }

    fn check_range(&self, x: f64) -> Result<()> {
        match self {
            LevelView::Scalars(c) => check_range(c, x),
            LevelView::Nodes(c) => check_range(c, x),
        }
    }

    fn lower(&self, search: Search, x: f64) -> usize {
        match (self, search) {
            (LevelView::Scalars(c), Search::Sorted) => c.lower_bound(x),
            (LevelView::Scalars(c), Search::Grid) => grid_lower_bound(c, x),
            (LevelView::Nodes(c), Search::Sorted) => c.lower_bound(x),
            (LevelView::Nodes(c), Search::Grid) => grid_lower_bound(c, x),
        }
    }

    fn floor_lookup(&self, lower: usize, x: f64) -> usize {
        match self {
            LevelView::Scalars(c) => crate::collection::floor_lookup(c, lower, x),
            LevelView::Nodes(c) => crate::collection::floor_lookup(c, lower, x),
        }
    }

    fn slot(&self, i: usize) -> Slot<'a> {
        match self {
            LevelView::Scalars(c) => Slot::Scalar(c.get(i).unwrap().y),
            LevelView::Nodes(c) => Slot::Tree(&c.get(i).unwrap().y),
        }
    }
}

fn wrap_hesse(f: Value, fp: Value, fpp: Value) -> Value {
    Value::Hesse(Box::new(ResultHesse::new(f, fp, fpp)))
}

fn wrap_pdf(f: Value, fp: Value, v: Value, total: Value) -> Value {
    Value::Pdf(Box::new(ResultPdf::new(f, fp, v, total)))
}

fn eval_stack(
    maps: &[MethodDescriptor],
    base: &BaseSpec,
    slot: Slot<'_>,
    args: &[f64],
    level: usize,
    policy: &ErrorPolicy<Value>,
    stats: &mut EvalStats,
) -> Result<Value> {
    if let Some((desc, rest)) = maps.split_first() {
        let node = match slot {
            Slot::Tree(node) => node,
            Slot::Scalar(_) => {
                return Err(Error::ShapeMismatch(
                    "map level reached a scalar ordinate".to_string(),
                ))
            }
        };
        return map_level(desc, rest, base, node, args, level, policy, stats);
    }
    match base {
        BaseSpec::Leaf(desc) => {
            let node = match slot {
                Slot::Tree(node) => node,
                Slot::Scalar(_) => {
                    return Err(Error::ShapeMismatch(
                        "leaf method reached a scalar ordinate".to_string(),
                    ))
                }
            };
            let c = node.as_leaf().ok_or_else(|| {
                Error::ShapeMismatch("leaf method over a nested table".to_string())
            })?;
            debug_assert_eq!(args.len(), 1);
            leaf_level(desc, c, args[0], level, policy, stats)
        }
        BaseSpec::Constant => {
            debug_assert_eq!(args.len(), 1);
            Ok(match slot {
                Slot::Tree(node) => Value::Table(Box::new(node.clone())),
                Slot::Scalar(v) => Value::Scalar(v),
            })
        }
        BaseSpec::Composed(inner) => {
            eval_stack(&inner.maps, &inner.base, slot, args, level, policy, stats)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn map_level(
    desc: &MethodDescriptor,
    rest: &[MethodDescriptor],
    base: &BaseSpec,
    node: &Node,
    args: &[f64],
    level: usize,
    policy: &ErrorPolicy<Value>,
    stats: &mut EvalStats,
) -> Result<Value> {
    let view = LevelView::of(node);
    let x = args[0];
    let rest_args = &args[1..];
    let n = view.len();
    let needed = desc.method.min_points();
    if n < needed {
        return route(policy, level, Error::too_few(needed, n));
    }
    if let Err(e) = view.check_range(x) {
        return route(policy, level, e);
    }
    let metric = view.metric();
    let lower = view.lower(desc.search, x);
    stats.record_search(level);

    // Polynomial methods without integrals only need their local window;
    // everything else interpolates over the full axis.
    match desc.method {
        Method::Polint(degree) if desc.kind != ResultKind::Pdf => {
            if degree == 0 {
                let i = view.floor_lookup(lower, x);
                let y = eval_stack(rest, base, view.slot(i), rest_args, level + 1, policy, stats)?;
                stats.record_blend(level);
                return Ok(match desc.kind {
                    ResultKind::Scalar => y,
                    ResultKind::Hesse => {
                        let zero = y.zero_like();
                        wrap_hesse(y, zero.clone(), zero)
                    }
                    ResultKind::Polynome(order) => {
                        let mut out = vec![y.zero_like(); order + 1];
                        out[0] = y;
                        Value::Polynome(out)
                    }
                    ResultKind::Pdf => unreachable!(),
                });
            }
            let start = kernel::polint_window(lower, n, degree);
            let mut xs = Vec::with_capacity(degree + 1);
            let mut ys = Vec::with_capacity(degree + 1);
            for i in start..=start + degree {
                xs.push(view.x(i));
                ys.push(eval_stack(
                    rest,
                    base,
                    view.slot(i),
                    rest_args,
                    level + 1,
                    policy,
                    stats,
                )?);
            }
            stats.record_blend(level);
            match desc.kind {
                ResultKind::Scalar => kernel::neville(&metric, &xs, &ys, x),
                ResultKind::Hesse => {
                    let mut d = kernel::neville_derivatives(&metric, &xs, &ys, x, 2)?;
                    let fpp = d.pop().unwrap();
                    let fp = d.pop().unwrap();
                    Ok(wrap_hesse(d.pop().unwrap(), fp, fpp))
                }
                ResultKind::Polynome(order) => {
                    let d = kernel::neville_derivatives(&metric, &xs, &ys, x, order)?;
                    Ok(Value::Polynome(d))
                }
                ResultKind::Pdf => unreachable!(),
            }
        }
        _ => {
            // Full-axis evaluation of the inner interpolants.
            let xs = view.abscissas();
            let mut inner = Vec::with_capacity(n);
            for i in 0..n {
                inner.push(eval_stack(
                    rest,
                    base,
                    view.slot(i),
                    rest_args,
                    level + 1,
                    policy,
                    stats,
                )?);
            }
            stats.record_blend(level);
            axis_interpolate(desc, &metric, &xs, &inner, lower, x)
        }
    }
}

/// 1D interpolation of already-evaluated inner results over a full axis.
/// Used by the spline and Hermite map levels (whose derivatives are
/// determined during the interpolation) and by every PDF result kind.
fn axis_interpolate(
    desc: &MethodDescriptor,
    metric: &Distance,
    xs: &[f64],
    inner: &[Value],
    lower: usize,
    x: f64,
) -> Result<Value> {
    let n = xs.len();
    match desc.method {
        Method::Polint(degree) => {
            debug_assert_eq!(desc.kind, ResultKind::Pdf);
            let j = kernel::interval_index(lower, n);
            let zero = inner[0].zero_like();
            let mut prefix = zero.clone();
            let mut total = zero.clone();
            for t in 0..n - 1 {
                if t == j {
                    prefix = total.clone();
                }
                let piece = if degree == 0 {
                    let mut p = inner[t].clone();
                    p.scale_mut(metric.distance(xs[t], xs[t + 1]));
                    p
                } else {
                    let start = kernel::polint_window(t + 1, n, degree);
                    kernel::neville_integral(
                        metric,
                        &xs[start..=start + degree],
                        &inner[start..=start + degree],
                        xs[t],
                        xs[t + 1],
                    )?
                };
                total.add_scaled(1.0, &piece)?;
            }
            let (f, fp, partial) = if degree == 0 {
                let i = kernel::lookup_index(metric, xs, lower, x);
                let mut partial = inner[j].clone();
                partial.scale_mut(metric.distance(xs[j], x));
                (inner[i].clone(), zero, partial)
            } else {
                let start = kernel::polint_window(j + 1, n, degree);
                let wx = &xs[start..=start + degree];
                let wy = &inner[start..=start + degree];
                let mut d = kernel::neville_derivatives(metric, wx, wy, x, 1)?;
                let fp = d.pop().unwrap();
                let f = d.pop().unwrap();
                let partial = kernel::neville_integral(metric, wx, wy, xs[j], x)?;
                (f, fp, partial)
            };
            let mut v = prefix;
            v.add_scaled(1.0, &partial)?;
            Ok(wrap_pdf(f, fp, v, total))
        }
        Method::Spline => {
            let d2 = kernel::natural_spline_derivatives(metric, xs, inner)?;
            let j = kernel::interval_index(lower, n);
            let (f, fp, fpp) = kernel::spline_piece(
                metric,
                xs[j],
                xs[j + 1],
                &inner[j],
                &inner[j + 1],
                &d2[j],
                &d2[j + 1],
                x,
            )?;
            match desc.kind {
                ResultKind::Scalar => Ok(f),
                ResultKind::Hesse => Ok(wrap_hesse(f, fp, fpp)),
                ResultKind::Pdf => {
                    let (v, total) = piecewise_integral(
                        j,
                        inner[0].zero_like(),
                        |t| {
                            kernel::spline_piece_integral(
                                metric,
                                xs[t],
                                xs[t + 1],
                                &inner[t],
                                &inner[t + 1],
                                &d2[t],
                                &d2[t + 1],
                                xs[t + 1],
                            )
                        },
                        || {
                            kernel::spline_piece_integral(
                                metric,
                                xs[j],
                                xs[j + 1],
                                &inner[j],
                                &inner[j + 1],
                                &d2[j],
                                &d2[j + 1],
                                x,
                            )
                        },
                        n,
                    )?;
                    Ok(wrap_pdf(f, fp, v, total))
                }
                ResultKind::Polynome(_) => Err(Error::ShapeMismatch(
                    "polynome results require a polynomial method".to_string(),
                )),
            }
        }
        Method::Hermite => {
            let slopes = kernel::hermite_slopes(metric, xs, inner)?;
            let j = kernel::interval_index(lower, n);
            let (f, fp, fpp) = kernel::hermite_piece(
                metric,
                xs[j],
                xs[j + 1],
                &inner[j],
                &inner[j + 1],
                &slopes[j],
                &slopes[j + 1],
                x,
            )?;
            match desc.kind {
                ResultKind::Scalar => Ok(f),
                ResultKind::Hesse => Ok(wrap_hesse(f, fp, fpp)),
                ResultKind::Pdf => {
                    let (v, total) = piecewise_integral(
                        j,
                        inner[0].zero_like(),
                        |t| {
                            kernel::hermite_piece_integral(
                                metric,
                                xs[t],
                                xs[t + 1],
                                &inner[t],
                                &inner[t + 1],
                                &slopes[t],
                                &slopes[t + 1],
                                xs[t + 1],
                            )
                        },
                        || {
                            kernel::hermite_piece_integral(
                                metric,
                                xs[j],
                                xs[j + 1],
                                &inner[j],
                                &inner[j + 1],
                                &slopes[j],
                                &slopes[j + 1],
                                x,
                            )
                        },
                        n,
                    )?;
                    Ok(wrap_pdf(f, fp, v, total))
                }
                ResultKind::Polynome(_) => Err(Error::ShapeMismatch(
                    "polynome results require a polynomial method".to_string(),
                )),
            }
        }
    }
}

/// Accumulate full piece integrals and the partial piece inside interval
/// `j`, returning the running integral up to `x` and the total.
fn piecewise_integral(
    j: usize,
    zero: Value,
    mut full_piece: impl FnMut(usize) -> Result<Value>,
    partial_piece: impl FnOnce() -> Result<Value>,
    n: usize,
) -> Result<(Value, Value)> {
    let mut prefix = zero.clone();
    let mut total = zero;
    for t in 0..n - 1 {
        if t == j {
            prefix = total.clone();
        }
        let piece = full_piece(t)?;
        total.add_scaled(1.0, &piece)?;
    }
    let mut v = prefix;
    v.add_scaled(1.0, &partial_piece()?)?;
    Ok((v, total))
}

fn leaf_level(
    desc: &MethodDescriptor,
    c: &Collection<IntegralElement<f64>>,
    x: f64,
    level: usize,
    policy: &ErrorPolicy<Value>,
    stats: &mut EvalStats,
) -> Result<Value> {
    let n = c.len();
    let needed = desc.method.min_points();
    if n < needed {
        return route(policy, level, Error::too_few(needed, n));
    }
    if let Err(e) = check_range(c, x) {
        return route(policy, level, e);
    }
    let metric = *c.metric();
    let lower = match desc.search {
        Search::Sorted => c.lower_bound(x),
        Search::Grid => grid_lower_bound(c, x),
    };
    stats.record_search(level);
    stats.record_blend(level);

    let scalar = Value::Scalar;
    let window = |start: usize, degree: usize| {
        let slice = &c.elements()[start..=start + degree];
        let wx: Vec<f64> = slice.iter().map(|e| e.x).collect();
        let wy: Vec<f64> = slice.iter().map(|e| e.y).collect();
        (wx, wy)
    };
    match desc.method {
        Method::Polint(degree) => {
            if desc.kind == ResultKind::Pdf {
                let j = kernel::interval_index(lower, n);
                let e_lo = c.get(j).unwrap();
                let total = c.last().unwrap().v;
                let (f, fp, partial) = if degree == 0 {
                    let i = crate::collection::floor_lookup(c, lower, x);
                    (
                        c.get(i).unwrap().y,
                        0.0,
                        e_lo.y * metric.distance(e_lo.x, x),
                    )
                } else {
                    let start = kernel::polint_window(j + 1, n, degree);
                    let (wx, wy) = window(start, degree);
                    let mut d = kernel::neville_derivatives(&metric, &wx, &wy, x, 1)?;
                    let fp = d.pop().unwrap();
                    let f = d.pop().unwrap();
                    let partial = kernel::neville_integral(&metric, &wx, &wy, e_lo.x, x)?;
                    (f, fp, partial)
                };
                return Ok(wrap_pdf(
                    scalar(f),
                    scalar(fp),
                    scalar(e_lo.v + partial),
                    scalar(total),
                ));
            }
            if degree == 0 {
                let i = crate::collection::floor_lookup(c, lower, x);
                let y = c.get(i).unwrap().y;
                return Ok(match desc.kind {
                    ResultKind::Scalar => scalar(y),
                    ResultKind::Hesse => wrap_hesse(scalar(y), scalar(0.0), scalar(0.0)),
                    ResultKind::Polynome(order) => {
                        let mut out = vec![scalar(0.0); order + 1];
                        out[0] = scalar(y);
                        Value::Polynome(out)
                    }
                    ResultKind::Pdf => unreachable!(),
                });
            }
            let start = kernel::polint_window(lower, n, degree);
            let (wx, wy) = window(start, degree);
            let (wx, wy) = (&wx[..], &wy[..]);
            match desc.kind {
                ResultKind::Scalar => Ok(scalar(kernel::neville(&metric, wx, wy, x)?)),
                ResultKind::Hesse => {
                    let mut d = kernel::neville_derivatives(&metric, wx, wy, x, 2)?;
                    let fpp = d.pop().unwrap();
                    let fp = d.pop().unwrap();
                    Ok(wrap_hesse(scalar(d.pop().unwrap()), scalar(fp), scalar(fpp)))
                }
                ResultKind::Polynome(order) => {
                    let d = kernel::neville_derivatives(&metric, wx, wy, x, order)?;
                    Ok(Value::Polynome(d.into_iter().map(scalar).collect()))
                }
                ResultKind::Pdf => unreachable!(),
            }
        }
        Method::Spline => {
            let j = kernel::interval_index(lower, n);
            let lo = c.get(j).unwrap();
            let hi = c.get(j + 1).unwrap();
            let (f, fp, fpp) =
                kernel::spline_piece(&metric, lo.x, hi.x, &lo.y, &hi.y, &lo.d, &hi.d, x)?;
            match desc.kind {
                ResultKind::Scalar => Ok(scalar(f)),
                ResultKind::Hesse => Ok(wrap_hesse(scalar(f), scalar(fp), scalar(fpp))),
                ResultKind::Pdf => {
                    let partial = kernel::spline_piece_integral(
                        &metric, lo.x, hi.x, &lo.y, &hi.y, &lo.d, &hi.d, x,
                    )?;
                    let total = c.last().unwrap().v;
                    Ok(wrap_pdf(
                        scalar(f),
                        scalar(fp),
                        scalar(lo.v + partial),
                        scalar(total),
                    ))
                }
                ResultKind::Polynome(_) => Err(Error::ShapeMismatch(
                    "polynome results require a polynomial method".to_string(),
                )),
            }
        }
        Method::Hermite => {
            let j = kernel::interval_index(lower, n);
            let lo = c.get(j).unwrap();
            let hi = c.get(j + 1).unwrap();
            let (f, fp, fpp) =
                kernel::hermite_piece(&metric, lo.x, hi.x, &lo.y, &hi.y, &lo.d, &hi.d, x)?;
            match desc.kind {
                ResultKind::Scalar => Ok(scalar(f)),
                ResultKind::Hesse => Ok(wrap_hesse(scalar(f), scalar(fp), scalar(fpp))),
                ResultKind::Pdf => {
                    let partial = kernel::hermite_piece_integral(
                        &metric, lo.x, hi.x, &lo.y, &hi.y, &lo.d, &hi.d, x,
                    )?;
                    let total = c.last().unwrap().v;
                    Ok(wrap_pdf(
                        scalar(f),
                        scalar(fp),
                        scalar(lo.v + partial),
                        scalar(total),
                    ))
                }
                ResultKind::Polynome(_) => Err(Error::ShapeMismatch(
                    "polynome results require a polynomial method".to_string(),
                )),
            }
        }
    }
}

fn compile_node(
    maps: &[MethodDescriptor],
    base: &BaseSpec,
    node: &mut Node,
    level: usize,
    path: &mut Vec<f64>,
) -> Result<()> {
    if let Some((desc, rest)) = maps.split_first() {
        let n = node.len();
        // Spline and Hermite levels need enough nodes on every axis
        // instance; polynomial levels report shortages at evaluation.
        let needed = match desc.method {
            Method::Spline | Method::Hermite => desc.method.min_points(),
            Method::Polint(_) => 0,
        };
        if n < needed {
            return Err(Error::too_few(needed, n).at_level(level, path));
        }
        check_grid(desc, node, level, path)?;
        match node {
            Node::Branch(c) => {
                for e in c.iter_mut() {
                    path.push(e.x);
                    compile_node(rest, base, &mut e.y, level + 1, path)?;
                    path.pop();
                }
                Ok(())
            }
            Node::Leaf(_) => {
                // The deepest collection: only a constant base may sit
                // below a map level over scalars.
                if rest.is_empty() && matches!(base, BaseSpec::Constant) {
                    Ok(())
                } else {
                    Err(Error::ShapeMismatch(format!(
                        "table too shallow at level {level}"
                    )))
                }
            }
        }
    } else {
        match base {
            BaseSpec::Constant => Ok(()),
            BaseSpec::Composed(inner) => compile_node(&inner.maps, &inner.base, node, level, path),
            BaseSpec::Leaf(desc) => {
                check_grid(desc, node, level, path)?;
                let c = node.as_leaf_mut().ok_or_else(|| {
                    Error::ShapeMismatch(format!("table too deep at level {level}"))
                })?;
                compile_leaf(desc, c).map_err(|e| e.at_level(level, path))
            }
        }
    }
}

fn check_grid(desc: &MethodDescriptor, node: &Node, level: usize, path: &[f64]) -> Result<()> {
    if desc.search != Search::Grid || node.len() < 2 {
        return Ok(());
    }
    let ok = match node {
        Node::Leaf(c) => is_equidistant(c),
        Node::Branch(c) => is_equidistant(c),
    };
    if ok {
        Ok(())
    } else {
        Err(Error::ShapeMismatch(format!(
            "grid search over non-equidistant abscissas at level {level}, key path {path:?}"
        )))
    }
}

fn compile_leaf(desc: &MethodDescriptor, c: &mut Collection<IntegralElement<f64>>) -> Result<()> {
    match desc.method {
        Method::Polint(degree) => {
            if desc.kind != ResultKind::Pdf {
                return Ok(());
            }
            let data = std::mem::take(c);
            let mut f = PolintFunction::new(degree, data)?;
            let outcome = f.compile();
            *c = f.into_data();
            outcome
        }
        Method::Spline => {
            let data = std::mem::take(c);
            let mut f = SplineFunction::new(data);
            let outcome = f.compile();
            *c = f.into_data();
            outcome
        }
        Method::Hermite => {
            let data = std::mem::take(c);
            let mut f = HermiteSplineFunction::new(data);
            let outcome = f.compile();
            *c = f.into_data();
            outcome
        }
    }
}
