//! Small scalar solvers shared by the analysis and optimizer modules.

use crate::error::{Error, Result};

/// Bisection on `[lo, hi]`, which must bracket a sign change of `f`.
///
/// Stops when the bracket is narrower than `xtol` (absolute), when `f` hits
/// zero exactly, or when the midpoint can no longer be represented.
pub fn bisect<F>(what: &'static str, mut f: F, lo: f64, hi: f64, xtol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (lo, hi);
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || fa.is_nan() || fb.is_nan() {
        return Err(Error::Bracket { what, lo, hi });
    }
    for _ in 0..2000 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b || (b - a) <= xtol {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// Golden-section minimization of a unimodal `f` over `[lo, hi]`.
///
/// Returns `(argmin, min)`. The endpoints are also compared so that a
/// minimum sitting on the boundary is returned exactly.
pub fn golden_section_min<F>(mut f: F, lo: f64, hi: f64, xtol: f64) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > xtol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let mut best = (x, f(x));
    for end in [lo, hi] {
        let v = f(end);
        if v < best.1 {
            best = (end, v);
        }
    }
    best
}
