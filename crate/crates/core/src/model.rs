//! Baseband model of the second-order type 2 PLL.
//!
//! The loop filter state `x` and the unwrapped phase error `theta_e` obey
//!
//! ```text
//! dx/dt       = v_e(theta_e)
//! dtheta_e/dt = omega_e_free - (K_vco / tau1) * (x + tau2 * v_e(theta_e))
//! ```
//!
//! where `v_e` is the continuous, 2π-periodic piecewise-linear phase detector
//! characteristic with rising slope `k` and falling slope `-1 / (π - 1/k)`.
//! The dimensionless form uses `tau = sqrt(K_vco / tau1) * t` and the
//! frequency-like variable `y`, in which the flow no longer depends on
//! `omega_e_free`.

use std::f64::consts::{FRAC_1_PI, PI, TAU};
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::error::{LockInError, Result};

/// Relative band around `a²k = 4` treated as the degenerate node.
pub const CASE_TOLERANCE: f64 = 1e-9;

/// Physical loop parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopParams {
    /// Loop filter integrator time constant, seconds.
    pub tau1: f64,
    /// Loop filter zero time constant, seconds.
    pub tau2: f64,
    /// VCO gain, rad/(s·V).
    pub k_vco: f64,
    /// Rising slope of the phase detector characteristic.
    pub k: f64,
}

impl LoopParams {
    pub fn new(tau1: f64, tau2: f64, k_vco: f64, k: f64) -> Result<Self> {
        let params = LoopParams {
            tau1,
            tau2,
            k_vco,
            k,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("tau1", self.tau1)?;
        check_positive("tau2", self.tau2)?;
        check_positive("k_vco", self.k_vco)?;
        check_slope(self.k)
    }

    /// `sqrt(K_vco / tau1)`, the factor converting seconds to dimensionless time.
    pub fn time_scale(&self) -> f64 {
        (self.k_vco / self.tau1).sqrt()
    }

    /// Factor `a / (2 tau2)` mapping a dimensionless separatrix height to rad/s.
    pub fn omega_scale(&self) -> f64 {
        0.5 * self.time_scale()
    }

    pub fn pd(&self) -> PiecewiseLinearPd {
        PiecewiseLinearPd { k: self.k }
    }

    pub fn coeffs(&self) -> DerivedCoeffs {
        DerivedCoeffs::from_dimensionless(self.tau2 * self.time_scale(), self.k)
    }

    /// Loop filter state of every equilibrium at the given frequency error.
    pub fn equilibrium_x(&self, omega_e_free: f64) -> f64 {
        self.tau1 * omega_e_free / self.k_vco
    }

    pub fn to_reduced(&self, state: State, omega_e_free: f64) -> ReducedState {
        let s = self.time_scale();
        let v = self.pd().value(state.theta_e);
        ReducedState {
            y: omega_e_free / s - s * (state.x + self.tau2 * v),
            theta_e: state.theta_e,
        }
    }

    pub fn from_reduced(&self, reduced: ReducedState, omega_e_free: f64) -> State {
        let s = self.time_scale();
        let v = self.pd().value(reduced.theta_e);
        State {
            x: (omega_e_free / s - reduced.y) / s - self.tau2 * v,
            theta_e: reduced.theta_e,
        }
    }
}

fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(LockInError::InvalidParameter {
            name,
            value,
            constraint: "finite and > 0",
        })
    }
}

fn check_slope(k: f64) -> Result<()> {
    if k.is_finite() && k > FRAC_1_PI {
        Ok(())
    } else {
        Err(LockInError::InvalidParameter {
            name: "k",
            value: k,
            constraint: "k > 1/pi",
        })
    }
}

/// Continuous piecewise-linear phase detector characteristic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiecewiseLinearPd {
    k: f64,
}

impl PiecewiseLinearPd {
    pub fn new(k: f64) -> Result<Self> {
        check_slope(k)?;
        Ok(PiecewiseLinearPd { k })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// Width `π - 1/k` of half the falling segment.
    pub fn fall_span(&self) -> f64 {
        PI - 1.0 / self.k
    }

    /// Splits `theta` into the period index and the offset in `[-1/k, 2π - 1/k)`.
    fn reduce(&self, theta: f64) -> (f64, f64) {
        let m = ((theta + 1.0 / self.k) / TAU).floor();
        let mut r = theta - TAU * m;
        // guard against rounding pushing r onto the next period's start
        if r >= TAU - 1.0 / self.k {
            r -= TAU;
        }
        (m, r)
    }

    pub fn value(&self, theta: f64) -> f64 {
        let (_, r) = self.reduce(theta);
        if r < 1.0 / self.k {
            self.k * r
        } else {
            (PI - r) / self.fall_span()
        }
    }

    /// Slope; at a breakpoint the rising-segment slope `k` is returned.
    pub fn slope(&self, theta: f64) -> f64 {
        let (_, r) = self.reduce(theta);
        if r <= 1.0 / self.k {
            self.k
        } else {
            -1.0 / self.fall_span()
        }
    }

    /// `∫₀^θ v_e(σ) dσ` in closed form. Each full period integrates to zero.
    pub fn integral(&self, theta: f64) -> f64 {
        let r = theta - TAU * (theta / TAU).round();
        let r = r.abs();
        let knee = 1.0 / self.k;
        if r <= knee {
            0.5 * self.k * r * r
        } else {
            let p = self.fall_span();
            let rest = PI - r;
            0.5 * knee + (p * p - rest * rest) / (2.0 * p)
        }
    }
}

pub fn pd_characteristic(theta_e: f64, k: f64) -> Result<f64> {
    Ok(PiecewiseLinearPd::new(k)?.value(theta_e))
}

pub fn pd_derivative(theta_e: f64, k: f64) -> Result<f64> {
    Ok(PiecewiseLinearPd::new(k)?.slope(theta_e))
}

/// Type of the stable equilibria, fixed by the sign of `a²k - 4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityCase {
    Node,
    DegenerateNode,
    Focus,
}

impl std::fmt::Display for StabilityCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            StabilityCase::Node => "node",
            StabilityCase::DegenerateNode => "degenerate_node",
            StabilityCase::Focus => "focus",
        })
    }
}

/// Dimensionless coefficients shared by every closed-form result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedCoeffs {
    /// `tau2 * sqrt(K_vco / tau1)`.
    pub a: f64,
    /// `sqrt(|a² - 4/k|)`.
    pub b: f64,
    /// `sqrt(a² + 4(π - 1/k))`.
    pub c: f64,
    pub k: f64,
    /// `a²k - 4`.
    pub discriminant: f64,
    pub case: StabilityCase,
}

impl DerivedCoeffs {
    /// Coefficients depend on the loop only through `a` and `k`.
    pub fn from_dimensionless(a: f64, k: f64) -> Self {
        let a2 = a * a;
        let discriminant = a2 * k - 4.0;
        let case = if discriminant.abs() <= CASE_TOLERANCE * 4.0 {
            StabilityCase::DegenerateNode
        } else if discriminant > 0.0 {
            StabilityCase::Node
        } else {
            StabilityCase::Focus
        };
        DerivedCoeffs {
            a,
            b: (a2 - 4.0 / k).abs().sqrt(),
            c: (a2 + 4.0 * (PI - 1.0 / k)).sqrt(),
            k,
            discriminant,
            case,
        }
    }

    pub fn pd(&self) -> PiecewiseLinearPd {
        PiecewiseLinearPd { k: self.k }
    }

    /// `π - 1/k`.
    pub fn fall_span(&self) -> f64 {
        PI - 1.0 / self.k
    }
}

pub fn derived_coeffs(params: &LoopParams) -> Result<DerivedCoeffs> {
    params.validate()?;
    Ok(params.coeffs())
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct State {
    pub x: f64,
    pub theta_e: f64,
}

impl State {
    pub fn new(x: f64, theta_e: f64) -> Self {
        State { x, theta_e }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ReducedState {
    pub y: f64,
    pub theta_e: f64,
}

impl ReducedState {
    pub fn new(y: f64, theta_e: f64) -> Self {
        ReducedState { y, theta_e }
    }
}

/// Right-hand side of the baseband ODE in seconds.
pub fn rhs(state: State, params: &LoopParams, omega_e_free: f64) -> State {
    let v = params.pd().value(state.theta_e);
    State {
        x: v,
        theta_e: omega_e_free - params.k_vco / params.tau1 * (state.x + params.tau2 * v),
    }
}

/// Right-hand side of the dimensionless system, returned as `(dy/dτ, dθ_e/dτ)`.
pub fn reduced_rhs(state: ReducedState, coeffs: &DerivedCoeffs) -> ReducedState {
    let pd = coeffs.pd();
    ReducedState {
        y: -coeffs.a * pd.slope(state.theta_e) * state.y - pd.value(state.theta_e),
        theta_e: state.y,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquilibriumKind {
    StableNode,
    StableDegenerateNode,
    StableFocus,
    Saddle,
}

impl EquilibriumKind {
    pub fn is_stable(self) -> bool {
        self != EquilibriumKind::Saddle
    }
}

impl std::fmt::Display for EquilibriumKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EquilibriumKind::StableNode => "stable_node",
            EquilibriumKind::StableDegenerateNode => "stable_degenerate_node",
            EquilibriumKind::StableFocus => "stable_focus",
            EquilibriumKind::Saddle => "saddle",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub x_eq: f64,
    /// `π m`.
    pub theta_eq: f64,
    pub m: i64,
    pub kind: EquilibriumKind,
}

impl Equilibrium {
    pub fn state(&self) -> State {
        State::new(self.x_eq, self.theta_eq)
    }
}

/// Equilibria `(tau1 ω / K_vco, π m)` for every `m` in the range.
pub fn equilibria(
    params: &LoopParams,
    omega_e_free: f64,
    m_range: RangeInclusive<i64>,
) -> Result<Vec<Equilibrium>> {
    params.validate()?;
    let stable = match params.coeffs().case {
        StabilityCase::Node => EquilibriumKind::StableNode,
        StabilityCase::DegenerateNode => EquilibriumKind::StableDegenerateNode,
        StabilityCase::Focus => EquilibriumKind::StableFocus,
    };
    let x_eq = params.equilibrium_x(omega_e_free);
    Ok(m_range
        .map(|m| Equilibrium {
            x_eq,
            theta_eq: PI * m as f64,
            m,
            kind: if m.rem_euclid(2) == 0 {
                stable
            } else {
                EquilibriumKind::Saddle
            },
        })
        .collect())
}

/// Jacobian of the baseband ODE, rows `(dx/dt, dθ_e/dt)`, columns `(x, θ_e)`.
pub fn jacobian(params: &LoopParams, theta_e: f64) -> [[f64; 2]; 2] {
    let slope = params.pd().slope(theta_e);
    let g = params.k_vco / params.tau1;
    [[0.0, slope], [-g, -g * params.tau2 * slope]]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Eigenvalues {
    Real(f64, f64),
    Complex { re: f64, im: f64 },
}

pub fn eigenvalues(m: [[f64; 2]; 2]) -> Eigenvalues {
    let trace = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = 0.25 * trace * trace - det;
    if disc >= 0.0 {
        let root = disc.sqrt();
        Eigenvalues::Real(0.5 * trace - root, 0.5 * trace + root)
    } else {
        Eigenvalues::Complex {
            re: 0.5 * trace,
            im: (-disc).sqrt(),
        }
    }
}

/// Lyapunov function: quadratic filter term plus the detector energy.
pub fn lyapunov_value(state: State, params: &LoopParams, omega_e_free: f64) -> f64 {
    let dx = state.x - params.equilibrium_x(omega_e_free);
    params.k_vco / (2.0 * params.tau1) * dx * dx + params.pd().integral(state.theta_e)
}

/// Time derivative of the Lyapunov function along the flow.
pub fn lyapunov_derivative(state: State, params: &LoopParams) -> f64 {
    let v = params.pd().value(state.theta_e);
    -params.k_vco * params.tau2 / params.tau1 * v * v
}
