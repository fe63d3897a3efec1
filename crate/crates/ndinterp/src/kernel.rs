//! Interpolation kernels over raw node data.
//!
//! Everything here works on slices of abscissas plus ordinates of any
//! [`Linear`] type, so the same code serves scalar leaf collections,
//! composite results travelling up through the dimensions, and whole
//! tables being blended during dimension reduction. Scalar coefficients
//! (node spacings, basis weights) always come from the [`Distance`]
//! metric; ordinates are only ever scaled and accumulated.

use crate::element::Distance;
use crate::error::Result;
use crate::linear::Linear;

/// Start index of the `(degree + 1)`-node window used for local
/// polynomial interpolation, given the lower-bound position of the
/// abscissa. The window is centred on the bracketing interval and
/// clamped at the edges. Degree 0 is handled by [`lookup_index`].
pub fn polint_window(lower: usize, len: usize, degree: usize) -> usize {
    debug_assert!(degree >= 1 && len > degree);
    lower
        .saturating_sub(degree.div_ceil(2))
        .min(len - 1 - degree)
}

/// Node index for degree-0 lookup: an exact hit maps to its node, any
/// abscissa strictly between nodes maps to the lower one.
pub fn lookup_index(metric: &Distance, xs: &[f64], lower: usize, x: f64) -> usize {
    if lower < xs.len() && metric.distance(x, xs[lower]) <= metric.precision() {
        lower
    } else {
        lower.saturating_sub(1)
    }
}

/// Index of the interval `[x_i, x_{i+1}]` bracketing the lower-bound
/// position, clamped so both endpoints exist.
pub fn interval_index(lower: usize, len: usize) -> usize {
    debug_assert!(len >= 2);
    lower.saturating_sub(1).min(len - 2)
}

/// Neville's algorithm: the value at `x` of the unique polynomial of
/// degree `< xs.len()` through all nodes.
pub fn neville<Y: Linear>(metric: &Distance, xs: &[f64], ys: &[Y], x: f64) -> Result<Y> {
    debug_assert!(!xs.is_empty() && xs.len() == ys.len());
    let n = xs.len();
    let mut work: Vec<Y> = ys.to_vec();
    for j in 1..n {
        for i in 0..n - j {
            let den = metric.distance(xs[i], xs[i + j]);
            let c1 = metric.distance(xs[i], x) / den;
            let c2 = metric.distance(x, xs[i + j]) / den;
            let mut v = work[i + 1].clone();
            v.scale_mut(c1);
            v.add_scaled(c2, &work[i])?;
            work[i] = v;
        }
    }
    Ok(work.swap_remove(0))
}

/// Neville's algorithm carrying derivatives: returns the value and the
/// first `order` derivatives of the interpolating polynomial at `x`.
///
/// The recurrence differentiates the classical one in place,
///   `P_{i,j} = ((x - x_i) P_{i+1,j-1} + (x_{i+j} - x) P_{i,j-1}) / (x_{i+j} - x_i)`,
/// so every returned derivative is exact for the interpolant itself.
pub fn neville_derivatives<Y: Linear>(
    metric: &Distance,
    xs: &[f64],
    ys: &[Y],
    x: f64,
    order: usize,
) -> Result<Vec<Y>> {
    debug_assert!(!xs.is_empty() && xs.len() == ys.len());
    let n = xs.len();
    let mut cells: Vec<Vec<Y>> = ys
        .iter()
        .map(|y| {
            let mut stack = Vec::with_capacity(order + 1);
            stack.push(y.clone());
            for _ in 0..order {
                stack.push(y.zero_like());
            }
            stack
        })
        .collect();
    for j in 1..n {
        for i in 0..n - j {
            let den = metric.distance(xs[i], xs[i + j]);
            let c1 = metric.distance(xs[i], x) / den;
            let c2 = metric.distance(x, xs[i + j]) / den;
            // Descending k keeps the previous column's k-1 entries intact
            // until they have been consumed.
            for k in (0..=order).rev() {
                let mut v = cells[i + 1][k].clone();
                v.scale_mut(c1);
                v.add_scaled(c2, &cells[i][k])?;
                if k > 0 {
                    let kf = k as f64 / den;
                    v.add_scaled(kf, &cells[i + 1][k - 1])?;
                    v.add_scaled(-kf, &cells[i][k - 1])?;
                }
                cells[i][k] = v;
            }
        }
    }
    Ok(cells.swap_remove(0))
}

/// Abscissas and weights of the 5-point Gauss-Legendre rule on [-1, 1],
/// exact for polynomials up to degree 9 (the supported interpolation
/// degrees never exceed 7).
const GAUSS_X: [f64; 5] = [
    -0.906179845938664,
    -0.5384693101056831,
    0.0,
    0.5384693101056831,
    0.906179845938664,
];
const GAUSS_W: [f64; 5] = [
    0.23692688505618908,
    0.47862867049936647,
    0.5688888888888889,
    0.47862867049936647,
    0.23692688505618908,
];

/// Integral over `[a, b]` of the polynomial through the given nodes.
/// Exact because the quadrature degree exceeds the polynomial degree.
pub fn neville_integral<Y: Linear>(
    metric: &Distance,
    xs: &[f64],
    ys: &[Y],
    a: f64,
    b: f64,
) -> Result<Y> {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = ys[0].zero_like();
    for (xi, wi) in GAUSS_X.iter().zip(&GAUSS_W) {
        let sample = neville(metric, xs, ys, mid + half * xi)?;
        acc.add_scaled(wi * half, &sample)?;
    }
    Ok(acc)
}

/// Second derivatives of the natural cubic spline through the nodes:
/// zero at both boundaries, tridiagonal (Thomas) solve in between.
pub fn natural_spline_derivatives<Y: Linear>(
    metric: &Distance,
    xs: &[f64],
    ys: &[Y],
) -> Result<Vec<Y>> {
    let n = xs.len();
    debug_assert!(n >= 2 && ys.len() == n);
    let mut d2: Vec<Y> = ys.iter().map(Linear::zero_like).collect();
    if n == 2 {
        return Ok(d2);
    }
    let h: Vec<f64> = (0..n - 1)
        .map(|i| metric.distance(xs[i], xs[i + 1]))
        .collect();

    // Forward sweep over the interior rows i = 1..n-2 with
    //   a_i = h_{i-1}, b_i = 2 (h_{i-1} + h_i), c_i = h_i,
    //   r_i = 6 ((y_{i+1} - y_i)/h_i - (y_i - y_{i-1})/h_{i-1}).
    let rows = n - 2;
    let mut c_prime = vec![0.0; rows];
    let mut r_prime: Vec<Y> = Vec::with_capacity(rows);
    for i in 1..n - 1 {
        let a = h[i - 1];
        let b = 2.0 * (h[i - 1] + h[i]);
        let c = h[i];
        let mut r = ys[i + 1].clone();
        r.scale_mut(6.0 / h[i]);
        r.add_scaled(-(6.0 / h[i] + 6.0 / h[i - 1]), &ys[i])?;
        r.add_scaled(6.0 / h[i - 1], &ys[i - 1])?;

        let k = i - 1;
        if k == 0 {
            c_prime[k] = c / b;
            r.scale_mut(1.0 / b);
        } else {
            let den = b - a * c_prime[k - 1];
            c_prime[k] = c / den;
            r.add_scaled(-a, &r_prime[k - 1])?;
            r.scale_mut(1.0 / den);
        }
        r_prime.push(r);
    }

    // Back substitution into d2[1..n-1].
    d2[n - 2] = r_prime[rows - 1].clone();
    for k in (0..rows - 1).rev() {
        let mut v = r_prime[k].clone();
        let next = d2[k + 2].clone();
        v.add_scaled(-c_prime[k], &next)?;
        d2[k + 1] = v;
    }
    Ok(d2)
}

/// Value, first and second derivative of the cubic-spline piece on
/// `[x_lo, x_hi]` with node values `y` and second derivatives `d2`.
#[allow(clippy::too_many_arguments)]
pub fn spline_piece<Y: Linear>(
    metric: &Distance,
    x_lo: f64,
    x_hi: f64,
    y_lo: &Y,
    y_hi: &Y,
    d2_lo: &Y,
    d2_hi: &Y,
    x: f64,
) -> Result<(Y, Y, Y)> {
    let h = metric.distance(x_lo, x_hi);
    let a = metric.distance(x, x_hi) / h;
    let b = 1.0 - a;
    let h2_6 = h * h / 6.0;

    let mut f = y_lo.clone();
    f.scale_mut(a);
    f.add_scaled(b, y_hi)?;
    f.add_scaled((a * a * a - a) * h2_6, d2_lo)?;
    f.add_scaled((b * b * b - b) * h2_6, d2_hi)?;

    let mut fp = y_hi.clone();
    fp.scale_mut(1.0 / h);
    fp.add_scaled(-1.0 / h, y_lo)?;
    fp.add_scaled(-(3.0 * a * a - 1.0) * h / 6.0, d2_lo)?;
    fp.add_scaled((3.0 * b * b - 1.0) * h / 6.0, d2_hi)?;

    let mut fpp = d2_lo.clone();
    fpp.scale_mut(a);
    fpp.add_scaled(b, d2_hi)?;

    Ok((f, fp, fpp))
}

/// Integral of the cubic-spline piece from `x_lo` up to `x` (which must
/// lie in the same interval).
#[allow(clippy::too_many_arguments)]
pub fn spline_piece_integral<Y: Linear>(
    metric: &Distance,
    x_lo: f64,
    x_hi: f64,
    y_lo: &Y,
    y_hi: &Y,
    d2_lo: &Y,
    d2_hi: &Y,
    x: f64,
) -> Result<Y> {
    let h = metric.distance(x_lo, x_hi);
    let t = metric.distance(x_lo, x) / h;
    let u = 1.0 - t;
    let h2_6 = h * h / 6.0;

    let mut v = y_lo.clone();
    v.scale_mut(t - 0.5 * t * t);
    v.add_scaled(0.5 * t * t, y_hi)?;
    v.add_scaled(
        h2_6 * (-0.25 * u * u * u * u + 0.5 * u * u - 0.25),
        d2_lo,
    )?;
    v.add_scaled(h2_6 * (0.25 * t * t * t * t - 0.5 * t * t), d2_hi)?;
    v.scale_mut(h);
    Ok(v)
}

/// Node slopes for monotonicity-preserving Hermite interpolation:
/// three-point finite differences in the interior, one-sided parabola
/// slopes at the ends, then limited by the Fritsch-Carlson criterion.
///
/// For composite ordinates the limiter runs independently on every
/// scalar component, so each interpolated component is shape-preserving
/// on its own.
pub fn hermite_slopes<Y: Linear>(metric: &Distance, xs: &[f64], ys: &[Y]) -> Result<Vec<Y>> {
    let n = xs.len();
    debug_assert!(n >= 2 && ys.len() == n);
    let h: Vec<f64> = (0..n - 1)
        .map(|i| metric.distance(xs[i], xs[i + 1]))
        .collect();
    let mut secants: Vec<Y> = Vec::with_capacity(n - 1);
    for i in 0..n - 1 {
        let mut d = ys[i + 1].clone();
        d.add_scaled(-1.0, &ys[i])?;
        d.scale_mut(1.0 / h[i]);
        secants.push(d);
    }

    let mut slopes: Vec<Y> = Vec::with_capacity(n);
    if n == 2 {
        slopes.push(secants[0].clone());
        slopes.push(secants[0].clone());
    } else {
        // One-sided parabola derivative at the left edge.
        let mut m = secants[0].clone();
        m.scale_mut((2.0 * h[0] + h[1]) / (h[0] + h[1]));
        m.add_scaled(-h[0] / (h[0] + h[1]), &secants[1])?;
        slopes.push(m);
        // Derivative at interior node i of the parabola through its
        // three surrounding nodes.
        for i in 1..n - 1 {
            let w = h[i - 1] + h[i];
            let mut m = secants[i - 1].clone();
            m.scale_mut(h[i] / w);
            m.add_scaled(h[i - 1] / w, &secants[i])?;
            slopes.push(m);
        }
        let ha = h[n - 2];
        let hb = h[n - 3];
        let mut m = secants[n - 2].clone();
        m.scale_mut((2.0 * ha + hb) / (ha + hb));
        m.add_scaled(-ha / (ha + hb), &secants[n - 3])?;
        slopes.push(m);
    }

    // Fritsch-Carlson limiting, componentwise.
    let width = ys[0].component_count();
    let mut m_comp = vec![0.0; n * width];
    let mut d_comp = vec![0.0; (n - 1) * width];
    let mut buf = Vec::with_capacity(width);
    for (i, m) in slopes.iter().enumerate() {
        buf.clear();
        m.flatten_into(&mut buf);
        for (p, &c) in buf.iter().enumerate() {
            m_comp[p * n + i] = c;
        }
    }
    for (i, d) in secants.iter().enumerate() {
        buf.clear();
        d.flatten_into(&mut buf);
        for (p, &c) in buf.iter().enumerate() {
            d_comp[p * (n - 1) + i] = c;
        }
    }
    for p in 0..width {
        fritsch_carlson(
            &d_comp[p * (n - 1)..(p + 1) * (n - 1)],
            &mut m_comp[p * n..(p + 1) * n],
        );
    }
    let limited: Vec<Y> = (0..n)
        .map(|i| {
            let mut stream = (0..width).map(|p| m_comp[p * n + i]);
            slopes[i].unflatten(&mut stream)
        })
        .collect();
    Ok(limited)
}

/// Scalar Fritsch-Carlson sweep: given interval secants `delta` and node
/// slopes `m`, adjust the slopes so the interpolant is monotone on every
/// interval where the data is.
fn fritsch_carlson(delta: &[f64], m: &mut [f64]) {
    let n = m.len();
    for i in 0..n - 1 {
        if delta[i] == 0.0 {
            m[i] = 0.0;
            m[i + 1] = 0.0;
            continue;
        }
        if m[i] / delta[i] < 0.0 {
            m[i] = 0.0;
        }
        if m[i + 1] / delta[i] < 0.0 {
            m[i + 1] = 0.0;
        }
        let alpha = m[i] / delta[i];
        let beta = m[i + 1] / delta[i];
        let s = alpha * alpha + beta * beta;
        if s > 9.0 {
            let tau = 3.0 / s.sqrt();
            m[i] = tau * alpha * delta[i];
            m[i + 1] = tau * beta * delta[i];
        }
    }
}

/// Value, first and second derivative of the Hermite piece on
/// `[x_lo, x_hi]` with node values `y` and node slopes `m`.
#[allow(clippy::too_many_arguments)]
pub fn hermite_piece<Y: Linear>(
    metric: &Distance,
    x_lo: f64,
    x_hi: f64,
    y_lo: &Y,
    y_hi: &Y,
    m_lo: &Y,
    m_hi: &Y,
    x: f64,
) -> Result<(Y, Y, Y)> {
    let h = metric.distance(x_lo, x_hi);
    let t = metric.distance(x_lo, x) / h;
    let t2 = t * t;
    let t3 = t2 * t;

    let mut f = y_lo.clone();
    f.scale_mut(2.0 * t3 - 3.0 * t2 + 1.0);
    f.add_scaled(-2.0 * t3 + 3.0 * t2, y_hi)?;
    f.add_scaled(h * (t3 - 2.0 * t2 + t), m_lo)?;
    f.add_scaled(h * (t3 - t2), m_hi)?;

    let mut fp = y_lo.clone();
    fp.scale_mut((6.0 * t2 - 6.0 * t) / h);
    fp.add_scaled((6.0 * t - 6.0 * t2) / h, y_hi)?;
    fp.add_scaled(3.0 * t2 - 4.0 * t + 1.0, m_lo)?;
    fp.add_scaled(3.0 * t2 - 2.0 * t, m_hi)?;

    let mut fpp = y_lo.clone();
    fpp.scale_mut((12.0 * t - 6.0) / (h * h));
    fpp.add_scaled((6.0 - 12.0 * t) / (h * h), y_hi)?;
    fpp.add_scaled((6.0 * t - 4.0) / h, m_lo)?;
    fpp.add_scaled((6.0 * t - 2.0) / h, m_hi)?;

    Ok((f, fp, fpp))
}

/// Integral of the Hermite piece from `x_lo` up to `x`.
#[allow(clippy::too_many_arguments)]
pub fn hermite_piece_integral<Y: Linear>(
    metric: &Distance,
    x_lo: f64,
    x_hi: f64,
    y_lo: &Y,
    y_hi: &Y,
    m_lo: &Y,
    m_hi: &Y,
    x: f64,
) -> Result<Y> {
    let h = metric.distance(x_lo, x_hi);
    let t = metric.distance(x_lo, x) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    let t4 = t2 * t2;

    let mut v = y_lo.clone();
    v.scale_mut(0.5 * t4 - t3 + t);
    v.add_scaled(-0.5 * t4 + t3, y_hi)?;
    v.add_scaled(h * (0.25 * t4 - 2.0 * t3 / 3.0 + 0.5 * t2), m_lo)?;
    v.add_scaled(h * (0.25 * t4 - t3 / 3.0), m_hi)?;
    v.scale_mut(h);
    Ok(v)
}
