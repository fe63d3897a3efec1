//! Natural cubic-spline interpolation over a collection.
//!
//! The compile step solves the tridiagonal system for the second
//! derivative at every node (zero at both boundaries) and, when the
//! element type stores partial integrals, accumulates the exact
//! piecewise-cubic integral from the lowest abscissa to every node.

use crate::collection::{check_range, Collection, Lookup};
use crate::element::Element;
use crate::error::{Error, Result};
use crate::functional::{ArgumentCursor, ErrorPolicy, Functional};
use crate::kernel;
use crate::linear::Linear;
use crate::results::{ResultHesse, ResultPdf};

/// A natural cubic spline. Needs at least 3 elements and a compile pass
/// before evaluation.
#[derive(Clone, Debug)]
pub struct SplineFunction<E: Element, C: Lookup<E> = Collection<E>> {
    data: C,
    policy: ErrorPolicy<E::Ordinate>,
    compiled: bool,
}

impl<E: Element, C: Lookup<E>> SplineFunction<E, C> {
    pub fn new(data: C) -> Self {
        SplineFunction {
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
        if n < 3 {
            return Err(Error::too_few(3, n));
        }
        let metric = *c.metric();
        let xs = c.abscissas();
        let ys: Vec<E::Ordinate> = c.iter().map(|e| e.y().clone()).collect();
        let d2 = kernel::natural_spline_derivatives(&metric, &xs, &ys)?;

        let has_integrals = c.first().unwrap().integral().is_some();
        let partials = if has_integrals {
            let mut v = ys[0].zero_like();
            let mut acc = Vec::with_capacity(n);
            acc.push(v.clone());
            for j in 0..n - 1 {
                let piece = kernel::spline_piece_integral(
                    &metric,
                    xs[j],
                    xs[j + 1],
                    &ys[j],
                    &ys[j + 1],
                    &d2[j],
                    &d2[j + 1],
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
        for (i, d) in d2.into_iter().enumerate() {
            data.get_mut(i).unwrap().set_derivative(d);
        }
        if let Some(partials) = partials {
            for (i, v) in partials.into_iter().enumerate() {
                data.get_mut(i).unwrap().set_integral(v);
            }
        }
        self.compiled = true;
        Ok(())
    }

    /// Bracketing interval after the contract and range checks.
    fn locate(&self, x: f64) -> Result<usize> {
        assert!(self.compiled, "spline evaluated before compile");
        let c = self.data.collection();
        check_range(c, x)?;
        Ok(kernel::interval_index(self.data.lower_bound(x), c.len()))
    }

    fn piece(&self, x: f64) -> Result<(E::Ordinate, E::Ordinate, E::Ordinate)> {
        let j = self.locate(x)?;
        let c = self.data.collection();
        let lo = c.get(j).unwrap();
        let hi = c.get(j + 1).unwrap();
        kernel::spline_piece(
            c.metric(),
            lo.x(),
            hi.x(),
            lo.y(),
            hi.y(),
            lo.derivative().expect("spline requires derivative storage"),
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
        let d_lo = lo.derivative().expect("spline requires derivative storage");
        let d_hi = hi.derivative().unwrap();
        let (f, fp, _) =
            kernel::spline_piece(c.metric(), lo.x(), hi.x(), lo.y(), hi.y(), d_lo, d_hi, x)?;
        let mut v = lo
            .integral()
            .expect("pdf evaluation requires integral element storage")
            .clone();
        let piece = kernel::spline_piece_integral(
            c.metric(),
            lo.x(),
            hi.x(),
            lo.y(),
            hi.y(),
            d_lo,
            d_hi,
            x,
        )?;
        v.add_scaled(1.0, &piece)?;
        let total = c.last().unwrap().integral().unwrap().clone();
        Ok(ResultPdf::new(f, fp, v, total))
    }
}

impl<E: Element, C: Lookup<E>> Functional for SplineFunction<E, C> {
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
