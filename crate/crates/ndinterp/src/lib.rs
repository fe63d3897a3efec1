//! Interpolation of data in any number of dimensions.
//!
//! The library is built from one-dimensional *collections* of
//! (abscissa, ordinate) elements. A multi-dimensional table is a
//! collection whose ordinates are themselves collections, one nesting
//! level per dimension; a multi-dimensional interpolation applies a 1D
//! method along every level, with the method, the search strategy and
//! the produced result chosen independently per dimension.
//!
//! Because every interpolation kernel only needs its ordinates to be
//! closed under scaling and addition, the ordinate can be a plain
//! scalar, a composite result carrying derivatives and partial
//! integrals, or a whole lower-dimensional table. That last case is what
//! makes dimension expansion and reduction work.
//!
//! ```
//! use ndinterp::{Axis, MethodDescriptor, MultiFunction, MultiMap};
//!
//! // Sample f(x, y) = x + y on a 2D grid.
//! let mut table = MultiMap::new(2);
//! table
//!     .configure(
//!         &[Axis::grid(5, 0.0, 1.0).unwrap(), Axis::grid(5, 0.0, 1.0).unwrap()],
//!         |key| key[0] + key[1],
//!     )
//!     .unwrap();
//!
//! // Interpolate it linearly in both dimensions.
//! let spec = MethodDescriptor::parse("sorted:polint1").unwrap();
//! let mut g = MultiFunction::from_parts(vec![spec; 2], table).unwrap();
//! g.compile_all().unwrap();
//! let value = g.evaluate(&[0.3, 0.7]).unwrap().as_scalar();
//! assert!((value - 1.0).abs() < 1e-12);
//! ```

mod collection;
mod constant;
mod element;
mod error;
mod functional;
mod hermite;
pub mod io;
pub mod kernel;
mod linear;
mod multifunction;
mod multimap;
mod polint;
mod results;
mod spline;
mod value;

pub use collection::{
    grid_lower_bound, is_equidistant, Axis, Collection, GridCollection, Lookup, GRID_SNAP,
    GRID_TOLERANCE,
};
pub use constant::ConstantFunction1D;
pub use element::{precedes, Distance, Element, Element2D, IntegralElement, SplineElement};
pub use error::{Error, Result};
pub use functional::{ArgumentCursor, ErrorPolicy, Functional};
pub use hermite::HermiteSplineFunction;
pub use linear::{scale_add, Linear};
pub use multifunction::{
    BaseSpec, EvalStats, LevelStats, Method, MethodDescriptor, MultiFunction, ResultKind, Search,
    StackSpec,
};
pub use multimap::MultiMap;
pub use polint::PolintFunction;
pub use results::{ResultHesse, ResultPdf, ResultPolynome};
pub use spline::SplineFunction;
pub use value::{Node, Value};
