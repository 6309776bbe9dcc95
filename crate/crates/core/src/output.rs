//! Number formatting shared by the CSV and JSON writers.

use serde::Serializer;

/// Fixed 17-significant-digit rendering; `nan`, `inf`, `-inf` for non-finite values.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x:.16e}")
    }
}

/// Serializes an extended real: finite values as numbers, infinities as the
/// strings `"+inf"` / `"-inf"`, NaN as `null`.
pub fn ext_real<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else if x.is_nan() {
        s.serialize_none()
    } else if *x > 0.0 {
        s.serialize_str("+inf")
    } else {
        s.serialize_str("-inf")
    }
}

pub fn opt_ext_real<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => ext_real(v, s),
        None => s.serialize_none(),
    }
}
