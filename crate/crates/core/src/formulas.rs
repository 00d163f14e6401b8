//! Closed-form lock-in and conservative lock-in frequencies, plus the
//! engineering estimates they are usually compared against.
//!
//! All exact results are expressed through the dimensionless heights of the
//! upper saddle separatrix of the reduced system: `y_l = S(0)` and
//! `y_l_c = S(-π)`, with `ω = a / (2 tau2) · y`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{LockInError, Result};
use crate::lambert::lambert_w0;
use crate::model::{DerivedCoeffs, LoopParams, StabilityCase};
use crate::roots::MonotoneSolve;

const SQRT_PI: f64 = 1.772_453_850_905_516;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LockIn {
    pub omega_l: f64,
    pub y_l: f64,
    pub case: StabilityCase,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConservativeLockIn {
    pub omega_l_c: f64,
    pub d: f64,
    pub y_l_c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LockInResult {
    pub omega_l: f64,
    pub omega_l_c: f64,
    pub case: StabilityCase,
    /// Separatrix height at `θ_e = -1/k`.
    pub d: f64,
    pub y_l: f64,
    pub y_l_c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateSet {
    pub gardner: f64,
    pub best_pull_out_based: f64,
    /// Only defined for the triangular characteristic with `a² < 2π`.
    pub huque_stensby_pull_out: Option<f64>,
}

/// `y_l = S(0)` for the given coefficients.
pub fn lock_in_height(coeffs: &DerivedCoeffs) -> f64 {
    let DerivedCoeffs { a, b, c, .. } = *coeffs;
    match coeffs.case {
        // ((c+b)/(c-b))^(a/2b) written through atanh to stay accurate as b → 0
        StabilityCase::Node => SQRT_PI * (a / b * (b / c).atanh()).exp(),
        StabilityCase::DegenerateNode => SQRT_PI * (a / (2.0 * SQRT_PI)).exp(),
        StabilityCase::Focus => SQRT_PI * (a / b * (b / c).atan()).exp(),
    }
}

pub fn lock_in_frequency(params: &LoopParams) -> Result<LockIn> {
    params.validate()?;
    let coeffs = params.coeffs();
    let y_l = lock_in_height(&coeffs);
    Ok(LockIn {
        omega_l: params.omega_scale() * y_l,
        y_l,
        case: coeffs.case,
    })
}

/// Lower bound of the admissible interval for `d`.
pub fn d_lower_bound(coeffs: &DerivedCoeffs) -> f64 {
    match coeffs.case {
        StabilityCase::Node => 0.5 * (coeffs.a + coeffs.b),
        StabilityCase::DegenerateNode | StabilityCase::Focus => 0.5 * coeffs.a,
    }
}

/// Log-form residual of the case-matched equation for `d`, with its derivative.
///
/// Zero exactly at the separatrix height `S(-1/k)`.
fn d_equation(coeffs: &DerivedCoeffs, d: f64) -> (f64, f64) {
    let DerivedCoeffs { a, b, c, k, .. } = *coeffs;
    match coeffs.case {
        StabilityCase::Node => {
            let near = d - 0.5 * (a - b);
            let far = d - 0.5 * (a + b);
            let lhs = near.ln() + far.ln() + a / b * (-b / near).ln_1p();
            let rhs = PI.ln() + 2.0 * a / b * (b / c).atanh();
            let slope = (b - a) / b / near + (b + a) / b / far;
            (lhs - rhs, slope)
        }
        StabilityCase::DegenerateNode => {
            let h = 0.5 * a;
            let u = d - h;
            let lhs = u.ln() - h / u;
            let rhs = SQRT_PI.ln() + a / (2.0 * SQRT_PI);
            (lhs - rhs, 1.0 / u + h / (u * u))
        }
        StabilityCase::Focus => {
            let u = d - 0.5 * a;
            let q = u * u + (1.0 / k - 0.25 * a * a);
            let lhs = q.ln() + 2.0 * a / b * (b / (a - 2.0 * d)).atan();
            let rhs = PI.ln() + 2.0 * a / b * (b / c).atan();
            (lhs - rhs, 2.0 * d / q)
        }
    }
}

/// Residual of the equation defining `d`, in log form (≈ relative residual).
pub fn d_residual(coeffs: &DerivedCoeffs, d: f64) -> f64 {
    d_equation(coeffs, d).0
}

/// Solves for `d = S(-1/k)`, the unique admissible root.
pub fn solve_d(coeffs: &DerivedCoeffs) -> Result<f64> {
    match coeffs.case {
        StabilityCase::DegenerateNode => {
            let s = coeffs.a / (2.0 * SQRT_PI);
            let w = lambert_w0(s * (-s).exp())?;
            Ok(0.5 * coeffs.a * (1.0 + 1.0 / w))
        }
        StabilityCase::Node | StabilityCase::Focus => MonotoneSolve::default().solve(
            &format!("solve_d ({} case, a={}, k={})", coeffs.case, coeffs.a, coeffs.k),
            d_lower_bound(coeffs),
            |d| d_equation(coeffs, d),
        ),
    }
}

/// `y_l_c = S(-π)` from `d`.
pub fn conservative_height(coeffs: &DerivedCoeffs, d: f64) -> Result<f64> {
    let DerivedCoeffs { a, c, .. } = *coeffs;
    let upper = d + 0.5 * (c - a);
    let lower = d - 0.5 * (c + a);
    if !(lower > 0.0 && upper > 0.0) {
        return Err(LockInError::numeric(
            "conservative_height",
            format!("d = {d} is not above (c+a)/2 = {}", 0.5 * (c + a)),
        ));
    }
    let log = ((c - a) * upper.ln() + (c + a) * lower.ln()) / (2.0 * c);
    Ok(log.exp())
}

pub fn conservative_lock_in(params: &LoopParams) -> Result<ConservativeLockIn> {
    params.validate()?;
    let coeffs = params.coeffs();
    let d = solve_d(&coeffs)?;
    let y_l_c = conservative_height(&coeffs, d)?;
    Ok(ConservativeLockIn {
        omega_l_c: params.omega_scale() * y_l_c,
        d,
        y_l_c,
    })
}

/// Both exact frequencies with their intermediate quantities.
pub fn lock_in_ranges(params: &LoopParams) -> Result<LockInResult> {
    let exact = lock_in_frequency(params)?;
    let conservative = conservative_lock_in(params)?;
    Ok(LockInResult {
        omega_l: exact.omega_l,
        omega_l_c: conservative.omega_l_c,
        case: exact.case,
        d: conservative.d,
        y_l: exact.y_l,
        y_l_c: conservative.y_l_c,
    })
}

/// `K_vco tau2 / tau1`.
pub fn gardner_estimate(params: &LoopParams) -> f64 {
    params.k_vco * params.tau2 / params.tau1
}

/// Half of Best's pull-out approximation `2.46 ω_n (ζ + 0.65)` with `K_d = 2/π`.
pub fn best_estimate(params: &LoopParams) -> f64 {
    let LoopParams {
        tau1, tau2, k_vco, ..
    } = *params;
    0.7995 * (2.0 * k_vco / (PI * tau1)).sqrt() + 1.23 * tau2 * k_vco / (PI * tau1)
}

/// Huque–Stensby pull-out frequency for the triangular characteristic.
pub fn huque_stensby_pull_out(params: &LoopParams) -> Result<f64> {
    params.validate()?;
    let triangular = 2.0 / PI;
    if (params.k - triangular).abs() > 1e-12 * triangular {
        return Err(LockInError::NotApplicable(format!(
            "Huque-Stensby formula needs the triangular characteristic k = 2/pi, got k = {}",
            params.k
        )));
    }
    let a = params.coeffs().a;
    let a2 = a * a;
    if a2 >= 2.0 * PI {
        return Err(LockInError::NotApplicable(format!(
            "Huque-Stensby formula needs a^2 < 2pi, got a^2 = {a2}"
        )));
    }
    let a_prime = PI / (2.0 * a2);
    let m_minus = 0.5 * (1.0 - (4.0 * a_prime + 1.0).sqrt());
    let s = (4.0 * a_prime - 1.0).sqrt();
    let exponent = 0.5 * (m_minus * m_minus - m_minus + a_prime).abs().ln()
        - ((1.0 - 2.0 * m_minus) / s).atan() / s
        + PI / (2.0 * s);
    Ok(a2 / params.tau2 * exponent.exp())
}

pub fn estimates(params: &LoopParams) -> Result<EstimateSet> {
    params.validate()?;
    Ok(EstimateSet {
        gardner: gardner_estimate(params),
        best_pull_out_based: best_estimate(params),
        huque_stensby_pull_out: huque_stensby_pull_out(params).ok(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig3() -> LoopParams {
        LoopParams::new(0.0633, 0.0225, 250.0, 2.0 / PI).unwrap()
    }

    /// Direct (non-log) form of the equation for d, as printed.
    fn d_equation_direct(coeffs: &DerivedCoeffs, d: f64) -> (f64, f64) {
        let DerivedCoeffs { a, b, c, k, .. } = *coeffs;
        match coeffs.case {
            StabilityCase::Node => (
                (d - (a - b) / 2.0).powf((b - a) / b) * (d - (a + b) / 2.0).powf((b + a) / b),
                PI * ((c + b) / (c - b)).powf(a / b),
            ),
            StabilityCase::DegenerateNode => (
                (d - a / 2.0) * ((a / 2.0) / (a / 2.0 - d)).exp(),
                SQRT_PI * (a / (2.0 * SQRT_PI)).exp(),
            ),
            StabilityCase::Focus => (
                (d * d - a * d + 1.0 / k) * (2.0 * a / b * (b / (a - 2.0 * d)).atan()).exp(),
                PI * (2.0 * a / b * (b / c).atan()).exp(),
            ),
        }
    }

    #[test]
    fn fig3_lock_in_frequency() {
        let r = lock_in_frequency(&fig3()).unwrap();
        assert_eq!(r.case, StabilityCase::Focus);
        assert!((r.omega_l - 85.27).abs() < 5e-3, "{}", r.omega_l);
        let c = fig3().coeffs();
        let expected = PI.sqrt() * ((c.a / c.b) * (c.b / c.c).atan()).exp();
        assert!((r.y_l - expected).abs() < 1e-14);
        assert!((r.y_l * c.a / (2.0 * 0.0225) - r.omega_l).abs() < 1e-10);
    }

    #[test]
    fn degenerate_branch_closed_form() {
        let base = fig3();
        let a = base.coeffs().a;
        let p = LoopParams { k: 4.0 / (a * a), ..base };
        let r = lock_in_frequency(&p).unwrap();
        assert_eq!(r.case, StabilityCase::DegenerateNode);
        let expected = a * PI.sqrt() / (2.0 * p.tau2) * (a / (2.0 * PI.sqrt())).exp();
        assert!((r.omega_l - expected).abs() < 1e-10 * expected);

        let cons = conservative_lock_in(&p).unwrap();
        let s = a / (2.0 * PI.sqrt());
        let w = lambert_w0(s * (-s).exp()).unwrap();
        assert!((cons.d - a / 2.0 * (1.0 + 1.0 / w)).abs() < 1e-14);
        let (lhs, rhs) = d_equation_direct(&p.coeffs(), cons.d);
        assert!((lhs / rhs - 1.0).abs() < 1e-10);
    }

    #[test]
    fn fig3_conservative_value() {
        let r = conservative_lock_in(&fig3()).unwrap();
        // numerically traced separatrix gives 70.706 for these parameters
        assert!((r.omega_l_c - 70.7065).abs() < 1e-3, "{}", r.omega_l_c);
        assert!(r.d > fig3().coeffs().a / 2.0);
    }

    #[test]
    fn direct_and_log_forms_agree() {
        for &(a, k) in &[(1.414, 2.0 / PI), (3.0, 1.0), (0.5, 3.5), (2.0, 1.2)] {
            let c = DerivedCoeffs::from_dimensionless(a, k);
            let d = solve_d(&c).unwrap();
            let (lhs, rhs) = d_equation_direct(&c, d);
            assert!((lhs / rhs - 1.0).abs() < 1e-10, "a={a} k={k}");
            assert!(d_residual(&c, d).abs() < 1e-10);
            assert!(d > d_lower_bound(&c));
        }
    }

    #[test]
    fn gardner_and_best() {
        let p = fig3();
        assert!((gardner_estimate(&p) - 88.8626).abs() < 1e-3);
        let doubled = LoopParams { tau2: 2.0 * p.tau2, ..p };
        assert!((gardner_estimate(&doubled) - 2.0 * gardner_estimate(&p)).abs() < 1e-12);
        assert!((best_estimate(&p) - 74.88).abs() < 5e-3, "{}", best_estimate(&p));
        let tiny = LoopParams { tau2: 1e-300, ..p };
        let limit = 0.7995 * (2.0 * p.k_vco / (PI * p.tau1)).sqrt();
        assert!((best_estimate(&tiny) - limit).abs() < 1e-12);
        let exact = lock_in_frequency(&p).unwrap().omega_l;
        assert!(gardner_estimate(&p) != exact);
    }

    #[test]
    fn huque_stensby_matches_on_fig3() {
        let p = fig3();
        let po = huque_stensby_pull_out(&p).unwrap();
        let exact = lock_in_frequency(&p).unwrap().omega_l;
        assert!((po / 2.0 - exact).abs() < 1e-9 * exact);
    }

    #[test]
    fn huque_stensby_domain_guards() {
        let p = fig3();
        let wide = LoopParams { tau2: 0.1, ..p };
        assert!(wide.coeffs().a.powi(2) >= 2.0 * PI);
        assert!(matches!(
            huque_stensby_pull_out(&wide),
            Err(LockInError::NotApplicable(_))
        ));
        let other_k = LoopParams { k: 1.0, ..p };
        assert!(matches!(
            huque_stensby_pull_out(&other_k),
            Err(LockInError::NotApplicable(_))
        ));
        assert!(estimates(&wide).unwrap().huque_stensby_pull_out.is_none());
        assert!(estimates(&p).unwrap().huque_stensby_pull_out.is_some());
    }

    #[test]
    fn invalid_params_propagate() {
        let p = LoopParams { k: 0.2, ..fig3() };
        assert!(lock_in_frequency(&p).is_err());
        assert!(conservative_lock_in(&p).is_err());
        assert!(estimates(&p).is_err());
    }
}
