//! Polynomial interpolation of configurable degree over a collection.
//!
//! Degree 0 is a plain look-up table (an abscissa strictly between nodes
//! maps to the lower node), degree 1 a linear interpolation, higher
//! degrees run Neville's algorithm over the `N + 1` nodes nearest to the
//! evaluation point. Degrees up to 7 are supported.

use crate::collection::{check_range, Collection, Lookup};
use crate::element::Element;
use crate::error::{Error, Result};
use crate::functional::{ArgumentCursor, ErrorPolicy, Functional};
use crate::kernel;
use crate::linear::Linear;
use crate::results::{ResultHesse, ResultPdf, ResultPolynome};

/// Highest supported polynomial degree.
pub const MAX_DEGREE: usize = 7;

/// A polynomial interpolation function of degree `N` over a sorted or
/// grid collection. Needs at least `N + 1` elements to evaluate.
#[derive(Clone, Debug)]
pub struct PolintFunction<E: Element, C: Lookup<E> = Collection<E>> {
    data: C,
    degree: usize,
    policy: ErrorPolicy<E::Ordinate>,
}

impl<E: Element, C: Lookup<E>> PolintFunction<E, C> {
    pub fn new(degree: usize, data: C) -> Result<Self> {
        if degree > MAX_DEGREE {
            return Err(Error::ShapeMismatch(format!(
                "polynomial degree {degree} exceeds the supported maximum {MAX_DEGREE}"
            )));
        }
        Ok(PolintFunction {
            data,
            degree,
            policy: ErrorPolicy::Raise,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn data(&self) -> &C {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut C {
        &mut self.data
    }

    pub fn into_data(self) -> C {
        self.data
    }

    pub fn set_policy(&mut self, policy: ErrorPolicy<E::Ordinate>) {
        self.policy = policy;
    }

    pub fn policy(&self) -> &ErrorPolicy<E::Ordinate> {
        &self.policy
    }

    /// Lower-bound position after the size and range preconditions.
    fn locate(&self, x: f64) -> Result<usize> {
        let c = self.data.collection();
        if c.len() <= self.degree {
            return Err(Error::too_few(self.degree + 1, c.len()));
        }
        check_range(c, x)?;
        Ok(self.data.lower_bound(x))
    }

    /// Window abscissas and ordinates for an interpolation around the
    /// lower-bound position.
    fn window(&self, lower: usize) -> (Vec<f64>, Vec<E::Ordinate>) {
        let c = self.data.collection();
        let start = kernel::polint_window(lower, c.len(), self.degree);
        let slice = &c.elements()[start..=start + self.degree];
        (
            slice.iter().map(Element::x).collect(),
            slice.iter().map(|e| e.y().clone()).collect(),
        )
    }

    fn eval_inner(&self, x: f64) -> Result<E::Ordinate> {
        let lower = self.locate(x)?;
        let c = self.data.collection();
        if self.degree == 0 {
            let i = crate::collection::floor_lookup(c, lower, x);
            return Ok(c.get(i).unwrap().y().clone());
        }
        let (xs, ys) = self.window(lower);
        kernel::neville(c.metric(), &xs, &ys, x)
    }

    fn derivatives_inner(&self, x: f64, order: usize) -> Result<Vec<E::Ordinate>> {
        let lower = self.locate(x)?;
        let c = self.data.collection();
        if self.degree == 0 {
            // A look-up table is piecewise constant: all derivatives zero.
            let i = crate::collection::floor_lookup(c, lower, x);
            let y = c.get(i).unwrap().y().clone();
            let mut out = vec![y.zero_like(); order + 1];
            out[0] = y;
            return Ok(out);
        }
        let (xs, ys) = self.window(lower);
        kernel::neville_derivatives(c.metric(), &xs, &ys, x, order)
    }

    pub fn eval(&self, x: f64) -> Result<E::Ordinate> {
        self.eval_inner(x).or_else(|e| self.policy.resolve(e))
    }

    /// Value with first and second derivative.
    pub fn eval_hesse(&self, x: f64) -> Result<ResultHesse<E::Ordinate>> {
        match self.derivatives_inner(x, 2) {
            Ok(mut d) => {
                let fpp = d.pop().unwrap();
                let fp = d.pop().unwrap();
                let f = d.pop().unwrap();
                Ok(ResultHesse::new(f, fp, fpp))
            }
            Err(e) => self.policy.map(|y| ResultHesse::splat(y.clone())).resolve(e),
        }
    }

    /// Value and the first `order` derivatives; `order` may not exceed
    /// the polynomial degree.
    pub fn eval_polynome(&self, x: f64, order: usize) -> Result<ResultPolynome<E::Ordinate>> {
        if order > self.degree {
            return Err(Error::ShapeMismatch(format!(
                "derivative order {order} exceeds polynomial degree {}",
                self.degree
            )));
        }
        match self.derivatives_inner(x, order) {
            Ok(d) => Ok(ResultPolynome::new(d)),
            Err(e) => self
                .policy
                .map(|y| ResultPolynome::new(vec![y.clone(); order + 1]))
                .resolve(e),
        }
    }

    /// Value, derivative and partial integrals. Requires integral
    /// element storage filled by [`Functional::compile`].
    pub fn eval_pdf(&self, x: f64) -> Result<ResultPdf<E::Ordinate>> {
        match self.pdf_inner(x) {
            Ok(r) => Ok(r),
            Err(e) => self.policy.map(|y| ResultPdf::splat(y.clone())).resolve(e),
        }
    }

    fn pdf_inner(&self, x: f64) -> Result<ResultPdf<E::Ordinate>> {
        let lower = self.locate(x)?;
        let c = self.data.collection();
        let n = c.len();
        let metric = *c.metric();
        let j = kernel::interval_index(lower, n);
        let e_lo = c.get(j).unwrap();
        let v_lo = e_lo
            .integral()
            .expect("pdf evaluation requires integral element storage")
            .clone();

        if self.degree == 0 {
            let i = crate::collection::floor_lookup(c, lower, x);
            let y = c.get(i).unwrap().y().clone();
            // Piecewise-constant: integral grows linearly from the lower
            // node of the bracketing interval.
            let mut v = v_lo;
            v.add_scaled(metric.distance(e_lo.x(), x), e_lo.y())?;
            let total = c.last().unwrap().integral().unwrap().clone();
            let fp = y.zero_like();
            return Ok(ResultPdf::new(y, fp, v, total));
        }

        // Use the window of the bracketing interval for value, slope and
        // the partial piece integral, matching what compile integrated.
        let start = kernel::polint_window(j + 1, n, self.degree);
        let slice = &c.elements()[start..=start + self.degree];
        let xs: Vec<f64> = slice.iter().map(Element::x).collect();
        let ys: Vec<E::Ordinate> = slice.iter().map(|e| e.y().clone()).collect();
        let mut d = kernel::neville_derivatives(&metric, &xs, &ys, x, 1)?;
        let fp = d.pop().unwrap();
        let f = d.pop().unwrap();
        let mut v = v_lo;
        let piece = kernel::neville_integral(&metric, &xs, &ys, e_lo.x(), x)?;
        v.add_scaled(1.0, &piece)?;
        let total = c.last().unwrap().integral().unwrap().clone();
        Ok(ResultPdf::new(f, fp, v, total))
    }

    fn compile_impl(&mut self) -> Result<()> {
        // Partial integrals only exist for integral element storage;
        // plain polynomial interpolation has nothing to precompute.
        let has_integrals = match self.data.collection().first() {
            Some(e) => e.integral().is_some(),
            None => false,
        };
        if !has_integrals {
            return Ok(());
        }
        let c = self.data.collection();
        let n = c.len();
        if n <= self.degree.max(1) {
            return Err(Error::too_few(self.degree.max(1) + 1, n));
        }
        let metric = *c.metric();
        let xs = c.abscissas();
        let mut v = c.first().unwrap().y().zero_like();
        let mut partials = Vec::with_capacity(n);
        partials.push(v.clone());
        for j in 0..n - 1 {
            if self.degree == 0 {
                let h = metric.distance(xs[j], xs[j + 1]);
                v.add_scaled(h, c.get(j).unwrap().y())?;
            } else {
                let start = kernel::polint_window(j + 1, n, self.degree);
                let slice = &c.elements()[start..=start + self.degree];
                let wx: Vec<f64> = slice.iter().map(Element::x).collect();
                let wy: Vec<E::Ordinate> = slice.iter().map(|e| e.y().clone()).collect();
                let piece = kernel::neville_integral(&metric, &wx, &wy, xs[j], xs[j + 1])?;
                v.add_scaled(1.0, &piece)?;
            }
            partials.push(v.clone());
        }
        for (e, v) in self.data.collection_mut().iter_mut().zip(partials) {
            e.set_integral(v);
        }
        Ok(())
    }
}

impl<E: Element, C: Lookup<E>> Functional for PolintFunction<E, C> {
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
    use crate::collection::{Axis, GridCollection};
    use crate::element::{Element2D, IntegralElement};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    type Plain = PolintFunction<Element2D<f64>>;

    fn table(points: &[(f64, f64)], degree: usize) -> Plain {
        let mut c = Collection::default();
        for &(x, y) in points {
            *c.insert_or_get_with(x, || 0.0) = y;
        }
        PolintFunction::new(degree, c).unwrap()
    }

    fn sampled(degree: usize, n: usize, lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> Plain {
        let mut c = Collection::default();
        c.configure(&Axis::grid(n, lo, hi).unwrap(), &f).unwrap();
        PolintFunction::new(degree, c).unwrap()
    }

    #[test]
    fn linear_midpoint() {
        let f = table(&[(0.0, 0.0), (1.0, 2.0)], 1);
        assert_eq!(f.eval(0.5).unwrap(), 1.0);
    }

    #[test]
    fn quadratic_reproduces_square() {
        let f = table(&[(0.0, 0.0), (1.0, 1.0), (2.0, 4.0)], 2);
        assert!((f.eval(1.5).unwrap() - 2.25).abs() < 1e-14);
    }

    #[test]
    fn lookup_ties_to_lower_node() {
        let f = table(&[(0.0, 10.0), (1.0, 20.0)], 0);
        assert_eq!(f.eval(0.4).unwrap(), 10.0);
        assert_eq!(f.eval(1.0).unwrap(), 20.0);
        assert_eq!(f.eval(0.0).unwrap(), 10.0);
    }

    #[test]
    fn cubic_tracks_sine_within_window_oracle() {
        // Independent oracle: brute-force Lagrange over the same 4-node
        // window that the frozen window rule selects.
        let n = 33;
        let f = sampled(3, n, 0.0, 3.2, f64::sin);
        let c = f.data().collection();
        let xs = c.abscissas();
        let x = 1.234;
        let lower = c.lower_bound(x);
        let start = kernel::polint_window(lower, n, 3);
        let mut oracle = 0.0;
        for i in start..start + 4 {
            let mut basis = 1.0;
            for j in start..start + 4 {
                if i != j {
                    basis *= (x - xs[j]) / (xs[i] - xs[j]);
                }
            }
            oracle += xs[i].sin() * basis;
        }
        let got = f.eval(x).unwrap();
        assert!((got - oracle).abs() < 1e-13);
        assert!((got - x.sin()).abs() < 2e-6);
    }

    #[test]
    fn polynomial_reproduction_with_derivatives() {
        let mut rng = StdRng::seed_from_u64(17);
        for degree in 1..=5usize {
            let coeffs: Vec<f64> = (0..=degree).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let poly = |x: f64| coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c);
            let f = sampled(degree, 9, -1.0, 1.0, poly);
            for _ in 0..100 {
                let x = rng.gen_range(-1.0..1.0);
                let expected = poly(x);
                let got = f.eval(x).unwrap();
                assert!(
                    (got - expected).abs() <= 1e-10 * expected.abs().max(1.0),
                    "degree {degree}"
                );
                // Analytic derivatives of the polynomial as oracle.
                let out = f.eval_polynome(x, degree).unwrap();
                let mut dc = coeffs.clone();
                for k in 0..=degree {
                    let expected_k = dc.iter().rev().fold(0.0, |acc, &c| acc * x + c);
                    assert!(
                        (out.y[k] - expected_k).abs() <= 1e-8 * expected_k.abs().max(1.0),
                        "degree {degree} order {k}: {} vs {expected_k}",
                        out.y[k]
                    );
                    dc = dc
                        .iter()
                        .enumerate()
                        .skip(1)
                        .map(|(i, &c)| i as f64 * c)
                        .collect();
                }
            }
        }
    }

    #[test]
    fn hesse_matches_finite_differences() {
        // Finite differences of the interpolant itself. Points sit away
        // from the nodes so the stencil stays inside one window.
        let f = sampled(3, 40, 0.0, 3.0, |x| (1.3 * x).sin() + 0.2 * x * x);
        let h = 1e-4 * 3.0;
        for &x in &[0.51, 1.13, 2.03, 2.62] {
            let r = f.eval_hesse(x).unwrap();
            let fp_fd = (f.eval(x + h).unwrap() - f.eval(x - h).unwrap()) / (2.0 * h);
            let fpp_fd = (f.eval(x + h).unwrap() - 2.0 * f.eval(x).unwrap()
                + f.eval(x - h).unwrap())
                / (h * h);
            assert!((r.fp - fp_fd).abs() <= 1e-4 * fp_fd.abs().max(1.0));
            assert!((r.fpp - fpp_fd).abs() <= 1e-4 * fpp_fd.abs().max(1.0));
        }
    }

    #[test]
    fn too_few_points_is_reported() {
        let f = table(&[(0.0, 1.0)], 1);
        assert!(matches!(
            f.eval(0.0),
            Err(Error::TooFewPoints { needed: 2, got: 1, .. })
        ));
    }

    #[test]
    fn out_of_range_routes_through_policy() {
        let mut f = table(&[(0.0, 0.0), (1.0, 2.0)], 1);
        assert!(matches!(f.eval(1.5), Err(Error::ValueOutOfRange { .. })));
        f.set_policy(ErrorPolicy::Default(0.0));
        assert_eq!(f.eval(1.5).unwrap(), 0.0);
        assert_eq!(f.eval_hesse(1.5).unwrap(), ResultHesse::splat(0.0));
    }

    #[test]
    fn polynome_order_capped_at_degree() {
        let f = table(&[(0.0, 0.0), (1.0, 1.0), (2.0, 4.0)], 2);
        assert!(f.eval_polynome(1.0, 2).is_ok());
        assert!(matches!(
            f.eval_polynome(1.0, 3),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn degree_is_capped() {
        let c: Collection<Element2D<f64>> = Collection::default();
        assert!(PolintFunction::new(8, c).is_err());
    }

    #[test]
    fn grid_and_sorted_agree() {
        let mut rng = StdRng::seed_from_u64(23);
        for degree in [0usize, 1, 2, 3] {
            let mut c: Collection<Element2D<f64>> = Collection::default();
            c.configure(&Axis::grid(12, -2.0, 2.0).unwrap(), |x| (x * 1.1).cos())
                .unwrap();
            let grid = GridCollection::from_collection(c.clone()).unwrap();
            let sorted = PolintFunction::new(degree, c).unwrap();
            let gridded = PolintFunction::new(degree, grid).unwrap();
            for _ in 0..200 {
                let x = rng.gen_range(-2.0..2.0);
                let a = sorted.eval(x).unwrap();
                let b = gridded.eval(x).unwrap();
                assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "degree {degree}");
            }
        }
    }

    #[test]
    fn pdf_partial_integrals() {
        // f(x) = 2x on [0, 1]: v(x) = x^2 exactly for degree >= 1.
        let mut c: Collection<IntegralElement<f64>> = Collection::default();
        c.configure(&Axis::grid(9, 0.0, 1.0).unwrap(), |x| 2.0 * x)
            .unwrap();
        let mut f = PolintFunction::new(1, c).unwrap();
        f.compile().unwrap();
        let r = f.eval_pdf(0.5).unwrap();
        assert!((r.f - 1.0).abs() < 1e-12);
        assert!((r.fp - 2.0).abs() < 1e-9);
        assert!((r.v - 0.25).abs() < 1e-9);
        assert!((r.total - 1.0).abs() < 1e-12);
        // At the top of the range the partial integral equals the total.
        let top = f.eval_pdf(1.0).unwrap();
        assert!((top.v - top.total).abs() < 1e-9 * top.total.abs().max(1.0));
    }

    #[test]
    fn pdf_cubic_matches_analytic_integral() {
        // Degree 3 reproduces cubics exactly, so v is the exact integral.
        let mut c: Collection<IntegralElement<f64>> = Collection::default();
        c.configure(&Axis::grid(7, 0.0, 2.0).unwrap(), |x| x * x * x - x)
            .unwrap();
        let mut f = PolintFunction::new(3, c).unwrap();
        f.compile().unwrap();
        for &x in &[0.3, 0.9, 1.5, 2.0] {
            let r = f.eval_pdf(x).unwrap();
            let exact = x * x * x * x / 4.0 - x * x / 2.0;
            assert!((r.v - exact).abs() < 1e-10, "x={x}: {} vs {exact}", r.v);
        }
    }

    #[test]
    fn evaluate_consumes_one_argument() {
        let f = table(&[(0.0, 0.0), (1.0, 2.0)], 1);
        let args = [0.5, 9.0];
        let mut cursor = ArgumentCursor::new(&args);
        let v = f.evaluate(&mut cursor).unwrap();
        assert_eq!(v, 1.0);
        assert_eq!(cursor.consumed(), 1);
    }
}
