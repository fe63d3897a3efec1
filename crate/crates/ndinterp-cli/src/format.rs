//! Deterministic text formatting of evaluation results.
//!
//! Scalars print as one number with 17 significant digits (round-trip
//! safe). Composite results print every labelled component on one line:
//! the plain value is `f`, derivatives are `df/dx0`, `d2f/dx0.dx1`,
//! `d2f/dx1^2` and so on, partial integrals append `.v[xi]` (up to the
//! argument) or `.V[xi]` (over the full range). Components whose total
//! derivative order exceeds two are omitted; they exist in the nested
//! result but carry no Hessian information.

use ndinterp::Value;

pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Clone, Default)]
struct Tags {
    /// (dimension, derivative order), order >= 1.
    derivatives: Vec<(usize, usize)>,
    /// (dimension, integral over the full range?).
    integrals: Vec<(usize, bool)>,
}

impl Tags {
    fn with_derivative(&self, dim: usize, order: usize) -> Tags {
        let mut next = self.clone();
        next.derivatives.push((dim, order));
        next
    }

    fn with_integral(&self, dim: usize, total: bool) -> Tags {
        let mut next = self.clone();
        next.integrals.push((dim, total));
        next
    }

    fn order(&self) -> usize {
        self.derivatives.iter().map(|(_, o)| o).sum()
    }

    fn label(&self) -> String {
        let mut label = if self.derivatives.is_empty() {
            "f".to_string()
        } else {
            let total = self.order();
            let parts: Vec<String> = self
                .derivatives
                .iter()
                .map(|(dim, order)| {
                    if *order == 1 {
                        format!("dx{dim}")
                    } else {
                        format!("dx{dim}^{order}")
                    }
                })
                .collect();
            if total == 1 {
                format!("df/{}", parts.join("."))
            } else {
                format!("d{total}f/{}", parts.join("."))
            }
        };
        for (dim, total) in &self.integrals {
            let which = if *total { 'V' } else { 'v' };
            label.push_str(&format!(".{which}[x{dim}]"));
        }
        label
    }
}

fn collect(value: &Value, dim: usize, tags: &Tags, out: &mut Vec<(Tags, f64)>) {
    match value {
        Value::Scalar(v) => out.push((tags.clone(), *v)),
        Value::Hesse(h) => {
            collect(&h.f, dim + 1, tags, out);
            collect(&h.fp, dim + 1, &tags.with_derivative(dim, 1), out);
            collect(&h.fpp, dim + 1, &tags.with_derivative(dim, 2), out);
        }
        Value::Pdf(p) => {
            collect(&p.f, dim + 1, tags, out);
            collect(&p.fp, dim + 1, &tags.with_derivative(dim, 1), out);
            collect(&p.v, dim + 1, &tags.with_integral(dim, false), out);
            collect(&p.total, dim + 1, &tags.with_integral(dim, true), out);
        }
        Value::Polynome(components) => {
            for (order, component) in components.iter().enumerate() {
                let next = if order == 0 {
                    tags.clone()
                } else {
                    tags.with_derivative(dim, order)
                };
                collect(component, dim + 1, &next, out);
            }
        }
        Value::Table(node) => {
            // Tables are not produced by the command-line method stacks;
            // summarize rather than dumping every leaf.
            out.push((tags.clone(), node.leaf_count() as f64));
        }
    }
}

/// One line per result: a bare number for a scalar, labelled components
/// otherwise.
pub fn format_components(value: &Value) -> String {
    if let Value::Scalar(v) = value {
        return format_f64(*v);
    }
    let mut components = Vec::new();
    collect(value, 0, &Tags::default(), &mut components);
    components
        .into_iter()
        .filter(|(tags, _)| tags.order() <= 2)
        .map(|(tags, v)| format!("{}={}", tags.label(), format_f64(v)))
        .collect::<Vec<_>>()
        .join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndinterp::{ResultHesse, ResultPdf};

    fn hesse(f: Value, fp: Value, fpp: Value) -> Value {
        Value::Hesse(Box::new(ResultHesse::new(f, fp, fpp)))
    }

    #[test]
    fn scalar_prints_seventeen_significant_digits() {
        assert_eq!(format_f64(1.0), "1.0000000000000000e0");
        assert_eq!(format_f64(441.0), "4.4100000000000000e2");
        // Round trip.
        let v = 0.123_456_789_012_345_68;
        let back: f64 = format_f64(v).parse().unwrap();
        assert_eq!(back.to_bits(), v.to_bits());
    }

    #[test]
    fn one_dimensional_hesse_labels() {
        let r = hesse(Value::Scalar(1.0), Value::Scalar(2.0), Value::Scalar(3.0));
        let line = format_components(&r);
        assert_eq!(
            line,
            "f=1.0000000000000000e0 df/dx0=2.0000000000000000e0 d2f/dx0^2=3.0000000000000000e0"
        );
    }

    #[test]
    fn three_dimensional_hesse_has_ten_components() {
        // Nested Hesse over three dimensions: 27 raw components, of
        // which the value, 3 gradients and 6 Hessian entries survive the
        // order filter.
        let scalar = |v: f64| Value::Scalar(v);
        let level2 = |b: f64| hesse(scalar(b), scalar(b + 0.1), scalar(b + 0.2));
        let level1 = |b: f64| hesse(level2(b), level2(b + 1.0), level2(b + 2.0));
        let r = hesse(level1(0.0), level1(10.0), level1(20.0));
        let line = format_components(&r);
        assert_eq!(line.split(' ').count(), 10, "{line}");
        assert!(line.starts_with("f="));
        assert!(line.contains("d2f/dx0.dx1="));
        assert!(line.contains("d2f/dx2^2="));
    }

    #[test]
    fn pdf_labels_include_partial_and_total_integrals() {
        let r = Value::Pdf(Box::new(ResultPdf::new(
            Value::Scalar(1.0),
            Value::Scalar(2.0),
            Value::Scalar(3.0),
            Value::Scalar(4.0),
        )));
        let line = format_components(&r);
        assert!(line.contains("f.v[x0]=3.0000000000000000e0"), "{line}");
        assert!(line.contains("f.V[x0]=4.0000000000000000e0"), "{line}");
    }
}
