//! Multi-dimensional maps: a collection of collections of collections...,
//! one nesting level per dimension, keyed by tuples of abscissa values.

use crate::collection::Axis;
use crate::element::Distance;
use crate::error::{Error, Result};
use crate::value::Node;

/// A map with one level of nested collections per dimension. Leaves are
/// scalar ordinates reached after exactly `dims` key lookups.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiMap {
    dims: usize,
    metric: Distance,
    root: Node,
}

impl MultiMap {
    /// An empty map of `dims >= 1` dimensions with the default metric.
    pub fn new(dims: usize) -> Self {
        MultiMap::with_metric(dims, Distance::default())
    }

    pub fn with_metric(dims: usize, metric: Distance) -> Self {
        assert!(dims >= 1, "a multi-map needs at least one dimension");
        MultiMap {
            dims,
            metric,
            root: Node::empty(dims, metric),
        }
    }

    /// Adopt an existing node tree, checking that every path reaches a
    /// leaf after exactly `dims` lookups.
    pub fn from_root(dims: usize, root: Node, metric: Distance) -> Result<Self> {
        check_depth(&root, dims)?;
        Ok(MultiMap { dims, metric, root })
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn metric(&self) -> &Distance {
        &self.metric
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn root_mut(&mut self) -> &mut Node {
        &mut self.root
    }

    pub fn into_root(self) -> Node {
        self.root
    }

    pub fn leaf_count(&self) -> usize {
        self.root.leaf_count()
    }

    pub fn is_empty(&self) -> bool {
        self.leaf_count() == 0
    }

    /// Ordinate handle at the given key tuple, inserting intermediate
    /// collections and a zero leaf as needed. Order is preserved by
    /// construction at every level.
    pub fn insert(&mut self, key: &[f64]) -> &mut f64 {
        assert_eq!(
            key.len(),
            self.dims,
            "key length {} does not match dimension count {}",
            key.len(),
            self.dims
        );
        insert_rec(&mut self.root, key, self.metric)
    }

    /// Like [`MultiMap::insert`] but fails when a leaf already exists
    /// within precision of the key.
    pub fn insert_new(&mut self, key: &[f64]) -> Result<&mut f64> {
        if self.get(key).is_some() {
            return Err(Error::DuplicateAbscissa {
                x: *key.last().unwrap(),
            });
        }
        Ok(self.insert(key))
    }

    /// Look a key tuple back up through one lower-bound hit per level.
    pub fn get(&self, key: &[f64]) -> Option<&f64> {
        if key.len() != self.dims {
            return None;
        }
        let mut node = &self.root;
        for (level, &x) in key.iter().enumerate() {
            match node {
                Node::Leaf(c) => {
                    let i = c.lower_bound(x);
                    let e = c.get(i)?;
                    if self.metric.distance(x, e.x) > self.metric.precision() {
                        return None;
                    }
                    debug_assert_eq!(level, key.len() - 1);
                    return Some(&e.y);
                }
                Node::Branch(c) => {
                    let i = c.lower_bound(x);
                    let e = c.get(i)?;
                    if self.metric.distance(x, e.x) > self.metric.precision() {
                        return None;
                    }
                    node = &e.y;
                }
            }
        }
        None
    }

    /// Populate the full tensor product of the given axes, one per
    /// dimension, with ordinates supplied by `fill`.
    pub fn configure(
        &mut self,
        axes: &[Axis],
        mut fill: impl FnMut(&[f64]) -> f64,
    ) -> Result<()> {
        if axes.len() != self.dims {
            return Err(Error::ShapeMismatch(format!(
                "{} axes for a {}-dimensional map",
                axes.len(),
                self.dims
            )));
        }
        self.configure_with(|level, _outer| axes[level].clone(), &mut fill)
    }

    /// Tensor-product population where the axis of each dimension may
    /// depend on the already-fixed outer key values, allowing different
    /// (ragged) inner axes across the outer nodes.
    pub fn configure_with(
        &mut self,
        mut make_axis: impl FnMut(usize, &[f64]) -> Axis,
        mut fill: impl FnMut(&[f64]) -> f64,
    ) -> Result<()> {
        let mut key = Vec::with_capacity(self.dims);
        self.root = build_node(
            self.dims,
            self.metric,
            &mut key,
            &mut make_axis,
            &mut fill,
        )?;
        Ok(())
    }

    /// Visit every leaf in lexicographic key order (outermost dimension
    /// slowest).
    pub fn for_each_leaf(&self, mut visit: impl FnMut(&[f64], &f64)) {
        let mut key = Vec::with_capacity(self.dims);
        visit_rec(&self.root, &mut key, &mut visit);
    }

    /// Mutable traversal: keys stay read-only, ordinates are writable.
    pub fn for_each_leaf_mut(&mut self, mut visit: impl FnMut(&[f64], &mut f64)) {
        let mut key = Vec::with_capacity(self.dims);
        visit_mut_rec(&mut self.root, &mut key, &mut visit);
    }

    /// Iterator over all leaves as owned `(key, ordinate)` pairs, in
    /// lexicographic key order.
    pub fn leaves(&self) -> Leaves<'_> {
        Leaves {
            stack: vec![Frame::for_node(&self.root)],
            key: Vec::with_capacity(self.dims),
        }
    }
}

fn insert_rec<'a>(node: &'a mut Node, key: &[f64], metric: Distance) -> &'a mut f64 {
    let x = key[0];
    match node {
        Node::Leaf(c) => {
            debug_assert_eq!(key.len(), 1);
            c.insert_or_get_with(x, || 0.0)
        }
        Node::Branch(c) => {
            let below = key.len() - 1;
            let child = c.insert_or_get_with(x, || Node::empty(below, metric));
            insert_rec(child, &key[1..], metric)
        }
    }
}

fn build_node(
    remaining: usize,
    metric: Distance,
    key: &mut Vec<f64>,
    make_axis: &mut impl FnMut(usize, &[f64]) -> Axis,
    fill: &mut impl FnMut(&[f64]) -> f64,
) -> Result<Node> {
    let level = key.len();
    let axis = make_axis(level, key);
    let xs = axis.values();
    for pair in xs.windows(2) {
        if metric.distance(pair[0], pair[1]) <= metric.precision() {
            return Err(Error::DuplicateAbscissa { x: pair[1] });
        }
    }
    if remaining == 1 {
        let mut c = crate::collection::Collection::new(metric);
        c.reserve(xs.len());
        for x in xs {
            key.push(x);
            let y = fill(key);
            key.pop();
            *c.insert_or_get_with(x, || 0.0) = y;
        }
        Ok(Node::Leaf(c))
    } else {
        let mut c = crate::collection::Collection::new(metric);
        c.reserve(xs.len());
        for x in xs {
            key.push(x);
            let child = build_node(remaining - 1, metric, key, make_axis, fill)?;
            key.pop();
            *c.insert_or_get_with(x, || Node::empty(remaining - 1, metric)) = child;
        }
        Ok(Node::Branch(c))
    }
}

fn visit_rec(node: &Node, key: &mut Vec<f64>, visit: &mut impl FnMut(&[f64], &f64)) {
    match node {
        Node::Leaf(c) => {
            for e in c.iter() {
                key.push(e.x);
                visit(key, &e.y);
                key.pop();
            }
        }
        Node::Branch(c) => {
            for e in c.iter() {
                key.push(e.x);
                visit_rec(&e.y, key, visit);
                key.pop();
            }
        }
    }
}

fn visit_mut_rec(node: &mut Node, key: &mut Vec<f64>, visit: &mut impl FnMut(&[f64], &mut f64)) {
    match node {
        Node::Leaf(c) => {
            for e in c.iter_mut() {
                key.push(e.x);
                visit(key, &mut e.y);
                key.pop();
            }
        }
        Node::Branch(c) => {
            for e in c.iter_mut() {
                key.push(e.x);
                visit_mut_rec(&mut e.y, key, visit);
                key.pop();
            }
        }
    }
}

fn check_depth(node: &Node, remaining: usize) -> Result<()> {
    match node {
        Node::Leaf(_) if remaining == 1 => Ok(()),
        Node::Leaf(_) => Err(Error::ShapeMismatch(format!(
            "leaf level reached with {remaining} dimensions left"
        ))),
        Node::Branch(c) if remaining >= 2 => c
            .iter()
            .try_for_each(|e| check_depth(&e.y, remaining - 1)),
        Node::Branch(_) => Err(Error::ShapeMismatch(
            "branch level where a leaf was expected".to_string(),
        )),
    }
}

enum Frame<'a> {
    Leaf(std::slice::Iter<'a, crate::element::IntegralElement<f64>>),
    Branch(std::slice::Iter<'a, crate::element::Element2D<Node>>),
}

impl<'a> Frame<'a> {
    fn for_node(node: &'a Node) -> Frame<'a> {
        match node {
            Node::Leaf(c) => Frame::Leaf(c.elements().iter()),
            Node::Branch(c) => Frame::Branch(c.elements().iter()),
        }
    }
}

/// Depth-first iterator over all leaves of a [`MultiMap`].
pub struct Leaves<'a> {
    stack: Vec<Frame<'a>>,
    key: Vec<f64>,
}

impl<'a> Iterator for Leaves<'a> {
    type Item = (Vec<f64>, &'a f64);

    fn next(&mut self) -> Option<Self::Item> {
        enum Step<'a> {
            Yield(f64, &'a f64),
            Push(f64, &'a Node),
            Pop,
        }
        loop {
            let step = match self.stack.last_mut()? {
                Frame::Leaf(iter) => match iter.next() {
                    Some(e) => Step::Yield(e.x, &e.y),
                    None => Step::Pop,
                },
                Frame::Branch(iter) => match iter.next() {
                    Some(e) => Step::Push(e.x, &e.y),
                    None => Step::Pop,
                },
            };
            match step {
                Step::Yield(x, y) => {
                    let mut key = self.key.clone();
                    key.push(x);
                    return Some((key, y));
                }
                Step::Push(x, node) => {
                    self.key.push(x);
                    self.stack.push(Frame::for_node(node));
                }
                Step::Pop => {
                    self.stack.pop();
                    self.key.pop();
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn insert_creates_one_leaf() {
        let mut m = MultiMap::new(3);
        *m.insert(&[1.0, 2.0, 3.0]) = 7.0;
        assert_eq!(m.leaf_count(), 1);
        assert_eq!(m.get(&[1.0, 2.0, 3.0]), Some(&7.0));
    }

    #[test]
    fn repeated_key_reuses_the_leaf() {
        let mut m = MultiMap::new(2);
        *m.insert(&[0.5, 0.5]) = 1.0;
        *m.insert(&[0.5, 0.5]) = 2.0;
        assert_eq!(m.leaf_count(), 1);
        assert_eq!(m.get(&[0.5, 0.5]), Some(&2.0));
    }

    #[test]
    fn cube_of_keys_yields_product_count() {
        let mut m = MultiMap::new(3);
        for &x in &[0.0, 1.0] {
            for &y in &[0.0, 1.0] {
                for &z in &[0.0, 1.0] {
                    *m.insert(&[x, y, z]) = x + y + z;
                }
            }
        }
        assert_eq!(m.leaf_count(), 8);
    }

    #[test]
    fn insert_new_rejects_duplicates() {
        let mut m = MultiMap::new(2);
        m.insert_new(&[0.0, 1.0]).unwrap();
        assert!(matches!(
            m.insert_new(&[0.0, 1.0]),
            Err(Error::DuplicateAbscissa { .. })
        ));
        assert_eq!(m.leaf_count(), 1);
    }

    #[test]
    fn super_iteration_is_lexicographic() {
        let mut m = MultiMap::new(2);
        // Insert out of order on purpose.
        for &(x, y) in &[(1.0, 1.0), (0.0, 0.0), (1.0, 0.0), (0.0, 1.0)] {
            *m.insert(&[x, y]) = 10.0 * x + y;
        }
        let seq: Vec<(Vec<f64>, f64)> = m.leaves().map(|(k, v)| (k, *v)).collect();
        assert_eq!(seq.len(), 4);
        assert_eq!(seq[0].0, vec![0.0, 0.0]);
        assert_eq!(seq[3].0, vec![1.0, 1.0]);
        let mut sorted = seq.clone();
        sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        assert_eq!(seq, sorted);
    }

    #[test]
    fn empty_map_iterates_nothing() {
        let m = MultiMap::new(3);
        assert_eq!(m.leaves().count(), 0);
        assert_eq!(m.leaf_count(), 0);
    }

    #[test]
    fn grid_21_cubed_has_9261_leaves() {
        // 21 nodes per axis over [-1, 1] at step 0.1.
        let mut m = MultiMap::new(3);
        let mut inserted = 0usize;
        for i in 0..21 {
            for j in 0..21 {
                for k in 0..21 {
                    let x = -1.0 + 0.1 * i as f64;
                    let y = -1.0 + 0.1 * j as f64;
                    let z = -1.0 + 0.1 * k as f64;
                    *m.insert(&[x, y, z]) = x * y * z;
                    inserted += 1;
                }
            }
        }
        assert_eq!(inserted, 9261);
        assert_eq!(m.leaf_count(), 9261);
        assert_eq!(m.leaves().count(), 9261);
    }

    #[test]
    fn configure_builds_tensor_product() {
        let mut m = MultiMap::new(2);
        m.configure(
            &[
                Axis::grid(3, 0.0, 2.0).unwrap(),
                Axis::grid(2, 0.0, 1.0).unwrap(),
            ],
            |key| key[0] + key[1],
        )
        .unwrap();
        assert_eq!(m.leaf_count(), 6);
        assert_eq!(m.get(&[2.0, 1.0]), Some(&3.0));
    }

    #[test]
    fn configure_single_node_axes() {
        let mut m = MultiMap::new(2);
        m.configure(
            &[
                Axis::set(vec![0.5]).unwrap(),
                Axis::set(vec![1.5]).unwrap(),
            ],
            |key| key[0] * key[1],
        )
        .unwrap();
        assert_eq!(m.leaf_count(), 1);
        assert_eq!(m.get(&[0.5, 1.5]), Some(&0.75));
    }

    #[test]
    fn key_dependent_inner_axis() {
        // Outer x < 0 gets 2 inner nodes, otherwise 3.
        let mut m = MultiMap::new(2);
        m.configure_with(
            |level, outer| {
                if level == 0 {
                    Axis::set(vec![-1.0, 1.0]).unwrap()
                } else if outer[0] < 0.0 {
                    Axis::grid(2, 0.0, 1.0).unwrap()
                } else {
                    Axis::grid(3, 0.0, 1.0).unwrap()
                }
            },
            |key| key[0] + key[1],
        )
        .unwrap();
        assert_eq!(m.leaf_count(), 5);
        let counts: Vec<usize> = m
            .root()
            .as_branch()
            .unwrap()
            .iter()
            .map(|e| e.y.len())
            .collect();
        assert_eq!(counts, vec![2, 3]);
    }

    #[test]
    fn lookup_round_trips_every_leaf() {
        let mut m = MultiMap::new(3);
        m.configure(
            &[
                Axis::grid(4, -1.0, 1.0).unwrap(),
                Axis::grid(3, 0.0, 5.0).unwrap(),
                Axis::grid(5, 2.0, 3.0).unwrap(),
            ],
            |key| key[0] * 7.0 + key[1] * 3.0 + key[2],
        )
        .unwrap();
        for (key, value) in m.leaves() {
            assert_eq!(m.get(&key), Some(value));
        }
    }

    #[test]
    fn iteration_order_is_stable_across_rebuilds() {
        let keys = [
            [0.4, 0.1],
            [0.1, 0.9],
            [0.9, 0.4],
            [0.1, 0.1],
            [0.4, 0.9],
        ];
        let build = |order: &[usize]| {
            let mut m = MultiMap::new(2);
            for &i in order {
                *m.insert(&keys[i]) = i as f64;
            }
            m.leaves().map(|(k, v)| (k, *v)).collect::<Vec<_>>()
        };
        let a = build(&[0, 1, 2, 3, 4]);
        let b = build(&[4, 2, 0, 3, 1]);
        assert_eq!(a, b);
    }

    #[test]
    fn mutable_traversal_writes_ordinates() {
        let mut m = MultiMap::new(2);
        m.configure(
            &[
                Axis::grid(2, 0.0, 1.0).unwrap(),
                Axis::grid(2, 0.0, 1.0).unwrap(),
            ],
            |_| 1.0,
        )
        .unwrap();
        m.for_each_leaf_mut(|key, y| *y = key[0] + key[1]);
        assert_eq!(m.get(&[1.0, 1.0]), Some(&2.0));
    }

    #[test]
    fn from_root_checks_uniform_depth() {
        let mut m = MultiMap::new(2);
        *m.insert(&[0.0, 1.0]) = 5.0;
        let root = m.root().clone();
        assert!(MultiMap::from_root(2, root.clone(), Distance::default()).is_ok());
        assert!(MultiMap::from_root(3, root, Distance::default()).is_err());
    }
}
