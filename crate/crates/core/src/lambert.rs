//! Principal branch of the Lambert W function on the positive reals.

use crate::error::{LockInError, Result};

const MAX_ITERATIONS: usize = 64;

/// `W₀(x)` for `x > 0`, the unique real `w` with `w·eʷ = x`.
///
/// Halley iteration from `ln(1 + x)`, which brackets the root from above
/// for all positive `x` and converges cubically.
pub fn lambert_w0(x: f64) -> Result<f64> {
    if x <= 0.0 || !x.is_finite() {
        return Err(LockInError::Domain {
            operation: "lambert_w0",
            value: x,
            domain: "(0, inf)".into(),
        });
    }
    if x < 1e-8 {
        // W(x) = x - x² + 3x³/2 - ...
        return Ok(x * (1.0 - x * (1.0 - 1.5 * x)));
    }
    let mut w = x.ln_1p();
    for _ in 0..MAX_ITERATIONS {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        let step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        w -= step;
        if step.abs() < 1e-15 * (1.0 + w.abs()) {
            break;
        }
    }
    Ok(w)
}
