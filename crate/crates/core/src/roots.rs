//! Root finding for strictly increasing scalar functions on a half-line.
//!
//! Every transcendental equation in this crate (the auxiliary root of the
//! conservative formula, the implicit separatrix equations) is monotone on its
//! admissible interval, so a bracket plus bisection always converges; Newton
//! steps polish the result once the bracket is narrow.

use crate::error::{LockInError, Result};

#[derive(Debug, Clone, Copy)]
pub struct MonotoneSolve {
    /// Offset above the open lower bound where the bracket starts.
    pub lower_offset: f64,
    /// Initial distance from the lower bound to the upper bracket.
    pub initial_width: f64,
    /// Relative bracket width at which bisection hands over to Newton.
    pub bisect_rel_width: f64,
    /// Target absolute residual for the Newton polish.
    pub residual_tol: f64,
    pub max_expansions: usize,
    pub max_iterations: usize,
}

impl Default for MonotoneSolve {
    fn default() -> Self {
        MonotoneSolve {
            lower_offset: 1e-9,
            initial_width: 1.0,
            bisect_rel_width: 1e-6,
            residual_tol: 1e-12,
            max_expansions: 200,
            max_iterations: 400,
        }
    }
}

impl MonotoneSolve {
    pub fn with_lower_offset(mut self, offset: f64) -> Self {
        self.lower_offset = offset;
        self
    }

    pub fn with_initial_width(mut self, width: f64) -> Self {
        self.initial_width = width;
        self
    }

    /// Finds the root of an increasing `f` on `(lower, ∞)`.
    ///
    /// `f` returns the value and derivative at a point.
    pub fn solve<F>(&self, context: &str, lower: f64, f: F) -> Result<f64>
    where
        F: Fn(f64) -> (f64, f64),
    {
        let mut lo = lower + self.lower_offset.max(f64::EPSILON * lower.abs());
        let (f_lo, _) = f(lo);
        if f_lo.is_nan() {
            return Err(LockInError::numeric(context, format!("NaN at lower bracket {lo}")));
        }
        if f_lo >= 0.0 {
            if f_lo.abs() <= self.residual_tol {
                return Ok(lo);
            }
            return Err(LockInError::numeric(
                context,
                format!("function already positive ({f_lo:e}) at lower bracket {lo}"),
            ));
        }

        let mut width = self.initial_width.max(self.lower_offset * 2.0);
        let mut hi = lower + width;
        let mut expansions = 0;
        loop {
            let (f_hi, _) = f(hi);
            if f_hi > 0.0 {
                break;
            }
            if f_hi.is_nan() || expansions >= self.max_expansions {
                return Err(LockInError::numeric(
                    context,
                    format!("bracket expansion failed, last upper bound {hi}"),
                ));
            }
            lo = hi;
            width *= 2.0;
            hi = lower + width;
            expansions += 1;
        }

        let mut iterations = 0;
        while hi - lo > self.bisect_rel_width * hi.abs().max(1.0) {
            let mid = 0.5 * (lo + hi);
            let (f_mid, _) = f(mid);
            if f_mid == 0.0 {
                return Ok(mid);
            }
            if f_mid > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
            iterations += 1;
            if iterations > self.max_iterations {
                break;
            }
        }

        let mut x = 0.5 * (lo + hi);
        for _ in 0..self.max_iterations {
            let (fx, dfx) = f(x);
            if fx.abs() <= self.residual_tol {
                return Ok(x);
            }
            if fx > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let newton = x - fx / dfx;
            let next = if dfx > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if next == x || hi - lo <= 4.0 * f64::EPSILON * x.abs() {
                return Ok(next);
            }
            x = next;
        }
        let (fx, _) = f(x);
        if fx.abs() <= 1e3 * self.residual_tol {
            Ok(x)
        } else {
            Err(LockInError::numeric(
                context,
                format!("no convergence, residual {fx:e} at {x}"),
            ))
        }
    }
}
