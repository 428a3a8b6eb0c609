use crate::error::{Error, Result};

const INV_E: f64 = 0.367_879_441_171_442_33;

/// Principal branch of the Lambert W function: the `w ≥ −1` solving `w·eʷ = x`.
///
/// Halley iteration from a branch-point series near `−1/e`, `ln(1 + x)` for
/// moderate arguments and `ln x − ln ln x` for large ones.
pub fn lambert_w0(x: f64) -> Result<f64> {
    if x.is_nan() || x < -INV_E {
        return Err(Error::domain(format!("W0 is undefined below -1/e (got {x})")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(f64::INFINITY);
    }
    let mut w = if x < -0.32 {
        let p = (2.0 * (std::f64::consts::E * x + 1.0)).max(0.0).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else if x < 3.0 {
        x.ln_1p()
    } else {
        let l = x.ln();
        l - l.ln()
    };
    if w <= -1.0 {
        return Ok(-1.0);
    }
    for _ in 0..64 {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        if wp1 == 0.0 {
            break;
        }
        let step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        let next = w - step;
        if !next.is_finite() {
            break;
        }
        let done = (next - w).abs() <= 4.0 * f64::EPSILON * (1.0 + next.abs());
        w = next.max(-1.0);
        if done {
            break;
        }
    }
    Ok(w)
}
