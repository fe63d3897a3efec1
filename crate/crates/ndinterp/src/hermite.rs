//! Monotonicity-preserving cubic Hermite interpolation.
//!
//! The compile step estimates a slope at every node (three-point finite
//! differences inside, one-sided at the ends) and limits the slopes with
//! the Fritsch-Carlson criterion, so a monotone data set produces a
//! monotone interpolant between every pair of nodes.

use crate::collection::{check_range, Collection, Lookup};
use crate::element::Element;
use crate::error::{Error, Result};
use crate::functional::{ArgumentCursor, ErrorPolicy, Functional};
use crate::kernel;
use crate::linear::Linear;
use crate::results::{ResultHesse, ResultPdf};

/// A cubic Hermite spline with limited slopes. Needs at least 2 elements
/// and a compile pass before evaluation.
#[derive(Clone, Debug)]
pub struct HermiteSplineFunction<E: Element, C: Lookup<E> = Collection<E>> {
    data: C,
    policy: ErrorPolicy<E::Ordinate>,
    compiled: bool,
}

impl<E: Element, C: Lookup<E>> HermiteSplineFunction<E, C> {
    pub fn new(data: C) -> Self {
        HermiteSplineFunction {
            data,
            policy: ErrorPolicy::Raise,
            compiled: false,
        }
    }

    pub fn data(&self) -> &C {
        &self.data
    }

    /// Mutable access to the underlying data invalidates the compile.
    pub fn data_mut(&mut self) -> &mut C {
        self.compiled = false;
        &mut self.data
    }

    pub fn into_data(self) -> C {
        self.data
    }

    pub fn is_compiled(&self) -> bool {
        self.compiled
    }

    pub fn set_policy(&mut self, policy: ErrorPolicy<E::Ordinate>) {
        self.policy = policy;
    }

    fn compile_impl(&mut self) -> Result<()> {
        let c = self.data.collection();
        let n = c.len();
        if n < 2 {
            return Err(Error::too_few(2, n));
        }
        let metric = *c.metric();
        let xs = c.abscissas();
        let ys: Vec<E::Ordinate> = c.iter().map(|e| e.y().clone()).collect();
        let slopes = kernel::hermite_slopes(&metric, &xs, &ys)?;

        let has_integrals = c.first().unwrap().integral().is_some();
        let partials = if has_integrals {
            let mut v = ys[0].zero_like();
            let mut acc = Vec::with_capacity(n);
            acc.push(v.clone());
            for j in 0..n - 1 {
                let piece = kernel::hermite_piece_integral(
                    &metric,
                    xs[j],
                    xs[j + 1],
                    &ys[j],
                    &ys[j + 1],
                    &slopes[j],
                    &slopes[j + 1],
                    xs[j + 1],
                )?;
                v.add_scaled(1.0, &piece)?;
                acc.push(v.clone());
            }
            Some(acc)
        } else {
            None
        };

        let data = self.data.collection_mut();
        for (i, m) in slopes.into_iter().enumerate() {
            data.get_mut(i).unwrap().set_derivative(m);
        }
        if let Some(partials) = partials {
            for (i, v) in partials.into_iter().enumerate() {
                data.get_mut(i).unwrap().set_integral(v);
            }
        }
        self.compiled = true;
        Ok(())
    }

    fn locate(&self, x: f64) -> Result<usize> {
        assert!(self.compiled, "hermite spline evaluated before compile");
        let c = self.data.collection();
        check_range(c, x)?;
        Ok(kernel::interval_index(self.data.lower_bound(x), c.len()))
    }

    fn piece(&self, x: f64) -> Result<(E::Ordinate, E::Ordinate, E::Ordinate)> {
        let j = self.locate(x)?;
        let c = self.data.collection();
        let lo = c.get(j).unwrap();
        let hi = c.get(j + 1).unwrap();
        kernel::hermite_piece(
            c.metric(),
            lo.x(),
            hi.x(),
            lo.y(),
            hi.y(),
            lo.derivative().expect("hermite requires derivative storage"),
            hi.derivative().unwrap(),
            x,
        )
    }

    pub fn eval(&self, x: f64) -> Result<E::Ordinate> {
        match self.piece(x) {
            Ok((f, _, _)) => Ok(f),
            Err(e) => self.policy.resolve(e),
        }
    }

    pub fn eval_hesse(&self, x: f64) -> Result<ResultHesse<E::Ordinate>> {
        match self.piece(x) {
            Ok((f, fp, fpp)) => Ok(ResultHesse::new(f, fp, fpp)),
            Err(e) => self.policy.map(|y| ResultHesse::splat(y.clone())).resolve(e),
        }
    }

    /// Value, derivative and partial integrals. Requires integral
    /// element storage.
    pub fn eval_pdf(&self, x: f64) -> Result<ResultPdf<E::Ordinate>> {
        match self.pdf_inner(x) {
            Ok(r) => Ok(r),
            Err(e) => self.policy.map(|y| ResultPdf::splat(y.clone())).resolve(e),
        }
    }

    fn pdf_inner(&self, x: f64) -> Result<ResultPdf<E::Ordinate>> {
        let j = self.locate(x)?;
        let c = self.data.collection();
        let lo = c.get(j).unwrap();
        let hi = c.get(j + 1).unwrap();
        let m_lo = lo.derivative().expect("hermite requires derivative storage");
        let m_hi = hi.derivative().unwrap();
        let (f, fp, _) =
            kernel::hermite_piece(c.metric(), lo.x(), hi.x(), lo.y(), hi.y(), m_lo, m_hi, x)?;
        let mut v = lo
            .integral()
            .expect("pdf evaluation requires integral element storage")
            .clone();
        let piece = kernel::hermite_piece_integral(
            c.metric(),
            lo.x(),
            hi.x(),
            lo.y(),
            hi.y(),
            m_lo,
            m_hi,
            x,
        )?;
        v.add_scaled(1.0, &piece)?;
        let total = c.last().unwrap().integral().unwrap().clone();
        Ok(ResultPdf::new(f, fp, v, total))
    }
}

impl<E: Element, C: Lookup<E>> Functional for HermiteSplineFunction<E, C> {
    type Output = E::Ordinate;

    fn dimensions(&self) -> usize {
        1
    }

    fn compile(&mut self) -> Result<()> {
        self.compile_impl()
    }

    fn evaluate(&self, cursor: &mut ArgumentCursor<'_>) -> Result<E::Ordinate> {
        let x = cursor.next_argument();
        self.eval(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collection::Axis;
    use crate::element::{IntegralElement, SplineElement};

    fn sampled(
        n: usize,
        lo: f64,
        hi: f64,
        f: impl Fn(f64) -> f64,
    ) -> HermiteSplineFunction<SplineElement<f64>> {
        let mut c: Collection<SplineElement<f64>> = Collection::default();
        c.configure(&Axis::grid(n, lo, hi).unwrap(), &f).unwrap();
        let mut h = HermiteSplineFunction::new(c);
        h.compile().unwrap();
        h
    }

    #[test]
    fn linear_data_is_reproduced_exactly() {
        let h = sampled(7, 0.0, 3.0, |x| 3.0 * x);
        for e in h.data().collection().iter() {
            assert!((e.d - 3.0).abs() < 1e-12);
        }
        assert!((h.eval(1.3).unwrap() - 3.9).abs() < 1e-12);
        // Interval midpoint of linear data is exact too.
        assert!((h.eval(0.25).unwrap() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn increasing_data_gives_nonnegative_slopes() {
        let h = sampled(20, -3.0, 3.0, |x| 1.0 / (1.0 + (-x).exp()));
        for e in h.data().collection().iter() {
            assert!(e.d >= 0.0);
        }
    }

    #[test]
    fn node_hits_are_exact() {
        let h = sampled(11, 0.0, 2.0, |x| (3.0 * x).sin());
        for e in h.data().collection().iter() {
            assert!((h.eval(e.x).unwrap() - e.y).abs() < 1e-13);
        }
    }

    #[test]
    fn monotone_interpolant_stays_in_node_bracket() {
        // Dense scan between every node pair of a monotone sigmoid.
        let h = sampled(14, -4.0, 4.0, |x| 1.0 / (1.0 + (-1.7 * x).exp()));
        let c = h.data().collection();
        for j in 0..c.len() - 1 {
            let (x0, y0) = (c.get(j).unwrap().x, c.get(j).unwrap().y);
            let (x1, y1) = (c.get(j + 1).unwrap().x, c.get(j + 1).unwrap().y);
            let (lo, hi) = (y0.min(y1), y0.max(y1));
            for s in 0..=1000 {
                let x = x0 + (x1 - x0) * s as f64 / 1000.0;
                let y = h.eval(x).unwrap();
                assert!(
                    y >= lo - 1e-12 && y <= hi + 1e-12,
                    "interval {j}, x={x}: {y} outside [{lo}, {hi}]"
                );
            }
        }
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let h = sampled(25, 0.0, 3.0, |x| (x * 0.9).sin() + 0.1 * x);
        let step = 1e-5;
        for &x in &[0.4, 1.2, 2.1, 2.8] {
            let r = h.eval_hesse(x).unwrap();
            let fd = (h.eval(x + step).unwrap() - h.eval(x - step).unwrap()) / (2.0 * step);
            assert!(
                (r.fp - fd).abs() <= 1e-6 * fd.abs().max(1.0),
                "x={x}: {} vs {fd}",
                r.fp
            );
        }
    }

    #[test]
    fn two_point_data_is_linear() {
        let mut c: Collection<SplineElement<f64>> = Collection::default();
        c.configure(&Axis::grid(2, 0.0, 1.0).unwrap(), |x| 2.0 + x).unwrap();
        let mut h = HermiteSplineFunction::new(c);
        h.compile().unwrap();
        assert!((h.eval(0.5).unwrap() - 2.5).abs() < 1e-15);
    }

    #[test]
    fn too_few_points_at_compile() {
        let mut c: Collection<SplineElement<f64>> = Collection::default();
        *c.insert_or_get_with(0.0, || 0.0) = 1.0;
        let mut h = HermiteSplineFunction::new(c);
        assert!(matches!(
            h.compile(),
            Err(Error::TooFewPoints { needed: 2, got: 1, .. })
        ));
    }

    #[test]
    #[should_panic(expected = "before compile")]
    fn evaluating_uncompiled_hermite_panics() {
        let mut c: Collection<SplineElement<f64>> = Collection::default();
        c.configure(&Axis::grid(4, 0.0, 1.0).unwrap(), |x| x).unwrap();
        let h = HermiteSplineFunction::new(c);
        let _ = h.eval(0.5);
    }

    #[test]
    fn grid_and_sorted_agree() {
        use crate::collection::GridCollection;
        let mut c: Collection<SplineElement<f64>> = Collection::default();
        c.configure(&Axis::grid(13, 0.0, 2.0).unwrap(), |x| (x - 1.0).tanh())
            .unwrap();
        let mut sorted = HermiteSplineFunction::new(c.clone());
        sorted.compile().unwrap();
        let mut gridded = HermiteSplineFunction::new(GridCollection::from_collection(c).unwrap());
        gridded.compile().unwrap();
        for i in 0..=200 {
            let x = 2.0 * i as f64 / 200.0;
            let a = sorted.eval(x).unwrap();
            let b = gridded.eval(x).unwrap();
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }

    #[test]
    fn pdf_is_nondecreasing_for_nonnegative_data() {
        let mut c: Collection<IntegralElement<f64>> = Collection::default();
        c.configure(&Axis::grid(12, 0.0, 4.0).unwrap(), |x| (x - 1.5).tanh() + 1.2)
            .unwrap();
        let mut h = HermiteSplineFunction::new(c);
        h.compile().unwrap();
        let mut prev = 0.0;
        for i in 0..=400 {
            let x = 4.0 * i as f64 / 400.0;
            let r = h.eval_pdf(x).unwrap();
            assert!(r.v >= prev - 1e-12, "x={x}");
            prev = r.v;
        }
        let top = h.eval_pdf(4.0).unwrap();
        assert!((top.v - top.total).abs() <= 1e-9 * top.total.abs());
    }
}
