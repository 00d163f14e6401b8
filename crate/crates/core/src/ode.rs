//! Adaptive Dormand–Prince 5(4) integrator with 4th-order dense output.
//!
//! Fixed-dimension state (`[f64; N]`), FSAL stage reuse, and the standard
//! RMS error norm. The caller drives it step by step so that observers can
//! stop early or locate crossings on the dense interpolant.

use crate::error::{LockInError, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeTolerances {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
}

/// One accepted step together with its dense interpolant.
#[derive(Debug, Clone, Copy)]
pub struct Step<const N: usize> {
    pub t0: f64,
    pub t1: f64,
    pub y0: [f64; N],
    pub y1: [f64; N],
    cont: [[f64; N]; 4],
}

impl<const N: usize> Step<N> {
    /// State at `t ∈ [t0, t1]`.
    pub fn interpolate(&self, t: f64) -> [f64; N] {
        let h = self.t1 - self.t0;
        let s = (t - self.t0) / h;
        let s1 = 1.0 - s;
        let mut out = [0.0; N];
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.y0[i]
                + s * (self.cont[0][i]
                    + s1 * (self.cont[1][i] + s * (self.cont[2][i] + s1 * self.cont[3][i])));
        }
        out
    }

    /// Locates `t` in the step where `g(state)` crosses zero, given a sign change
    /// between the endpoints.
    pub fn locate<G: Fn(&[f64; N]) -> f64>(&self, g: G) -> f64 {
        let (mut lo, mut hi) = (self.t0, self.t1);
        let g_lo = g(&self.y0);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            if (g(&self.interpolate(mid)) > 0.0) == (g_lo > 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

pub struct Dopri5<F, const N: usize> {
    f: F,
    tol: OdeTolerances,
    t: f64,
    y: [f64; N],
    k1: [f64; N],
    h: f64,
    rejected_last: bool,
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        let mut acc = 0.0;
        for (coef, k) in terms {
            acc += coef * k[i];
        }
        out[i] += h * acc;
    }
    out
}

impl<F, const N: usize> Dopri5<F, N>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    pub fn new(mut f: F, t0: f64, y0: [f64; N], tol: OdeTolerances) -> Self {
        let k1 = f(t0, &y0);
        let h = initial_step(&y0, &k1, &tol);
        Dopri5 {
            f,
            tol,
            t: t0,
            y: y0,
            k1,
            h,
            rejected_last: false,
        }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> [f64; N] {
        self.y
    }

    /// Advances by one accepted step, never past `t_limit`.
    pub fn step(&mut self, t_limit: f64) -> Result<Step<N>> {
        let min_step = 1e-14 * self.t.abs().max(1.0);
        loop {
            let mut h = self.h.min(self.tol.max_step);
            let last = self.t + h >= t_limit;
            if last {
                h = t_limit - self.t;
            }
            if h < min_step && !last {
                return Err(LockInError::Integrator {
                    t: self.t,
                    detail: format!("step size underflow (h = {h:e})"),
                });
            }
            let (t, y, k1) = (self.t, self.y, self.k1);
            let f = &mut self.f;
            let k2 = f(t + C2 * h, &axpy(&y, h, &[(A21, &k1)]));
            let k3 = f(t + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
            let k4 = f(t + C4 * h, &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = f(
                t + C5 * h,
                &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            );
            let k6 = f(
                t + h,
                &axpy(
                    &y,
                    h,
                    &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                ),
            );
            let y1 = axpy(
                &y,
                h,
                &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
            );
            let t1 = if last { t_limit } else { t + h };
            let k7 = f(t1, &y1);

            let mut err = 0.0;
            for i in 0..N {
                let e = h
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let scale = self.tol.abs_tol + self.tol.rel_tol * y[i].abs().max(y1[i].abs());
                err += (e / scale).powi(2);
            }
            let err = (err / N as f64).sqrt();
            if !err.is_finite() {
                return Err(LockInError::Integrator {
                    t,
                    detail: "non-finite error estimate".into(),
                });
            }

            let factor = if err == 0.0 {
                MAX_FACTOR
            } else {
                (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
            };
            if err <= 1.0 {
                let mut cont = [[0.0; N]; 4];
                for i in 0..N {
                    let dy = y1[i] - y[i];
                    let bspl = h * k1[i] - dy;
                    cont[0][i] = dy;
                    cont[1][i] = bspl;
                    cont[2][i] = dy - h * k7[i] - bspl;
                    cont[3][i] = h
                        * (D1 * k1[i]
                            + D3 * k3[i]
                            + D4 * k4[i]
                            + D5 * k5[i]
                            + D6 * k6[i]
                            + D7 * k7[i]);
                }
                let grow = if self.rejected_last { factor.min(1.0) } else { factor };
                if !last || h >= self.h {
                    self.h = (h * grow).min(self.tol.max_step);
                }
                self.rejected_last = false;
                self.t = t1;
                self.y = y1;
                self.k1 = k7;
                return Ok(Step {
                    t0: t,
                    t1,
                    y0: y,
                    y1,
                    cont,
                });
            }
            self.rejected_last = true;
            self.h = h * factor.min(1.0);
        }
    }
}

fn initial_step<const N: usize>(y0: &[f64; N], f0: &[f64; N], tol: &OdeTolerances) -> f64 {
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for i in 0..N {
        let scale = tol.abs_tol + tol.rel_tol * y0[i].abs();
        d0 += (y0[i] / scale).powi(2);
        d1 += (f0[i] / scale).powi(2);
    }
    let (d0, d1) = ((d0 / N as f64).sqrt(), (d1 / N as f64).sqrt());
    let h = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h.min(tol.max_step)
}
