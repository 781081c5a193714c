//! Order statistics shared by the BHR report and the centrality bands.

use crate::Scalar;

/// Percentile of an ascending slice by linear interpolation between order
/// statistics: position `q * (n - 1)`, with `q` in `[0, 1]`.
///
/// Returns `None` for an empty slice.
pub fn percentile_sorted<T: Scalar>(sorted: &[T], q: f64) -> Option<T> {
    let n = sorted.len();
    if n == 0 {
        return None;
    }
    let q = q.clamp(0.0, 1.0);
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        return Some(sorted[lo]);
    }
    let frac = T::of(pos - lo as f64);
    Some(sorted[lo] + (sorted[hi] - sorted[lo]) * frac)
}

/// Sorts a copy of `values` (NaNs are rejected by the caller) and returns the percentile.
pub fn percentile<T: Scalar>(values: &[T], q: f64) -> Option<T> {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("percentile input must not contain NaN"));
    percentile_sorted(&v, q)
}
