//! Analytic upper separatrix `y = S(θ_e)` of the reduced system.
//!
//! The reduced flow is linear on each of three strips, so the separatrix that
//! enters the saddle `(π, 0)` is known in closed or implicit form on each:
//!
//! * Domain I, `1/k ≤ θ_e ≤ π`: the saddle's incoming eigenline.
//! * Domain II, `-1/k ≤ θ_e ≤ 1/k`: a first integral of the linear system
//!   around the stable equilibrium, whose form depends on the stability case.
//! * Domain III, `-π ≤ θ_e ≤ -1/k`: a first integral around the saddle `(-π, 0)`.
//!
//! Each implicit equation is strictly increasing in `y` on the half-line where
//! the separatrix lives, so a bracketing solve always finds the right branch.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{LockInError, Result};
use crate::formulas::{conservative_height, lock_in_height, solve_d};
use crate::model::{DerivedCoeffs, LoopParams, StabilityCase};
use crate::roots::MonotoneSolve;

const SQRT_PI: f64 = 1.772_453_850_905_516;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Domain {
    I,
    II,
    III,
}

impl std::fmt::Display for Domain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Domain::I => "I",
            Domain::II => "II",
            Domain::III => "III",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparatrixSample {
    pub theta_e: f64,
    pub y: f64,
    pub domain: Domain,
}

/// Separatrix heights at the domain boundaries and at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Landmarks {
    /// `S(1/k) = (c - a)/2`.
    pub s_knee: f64,
    /// `S(0) = y_l`.
    pub s_zero: f64,
    /// `S(-1/k) = d`.
    pub s_neg_knee: f64,
    /// `S(-π) = y_l_c`.
    pub s_minus_pi: f64,
}

impl Landmarks {
    pub fn compute(coeffs: &DerivedCoeffs) -> Result<Self> {
        let d = solve_d(coeffs)?;
        Ok(Landmarks {
            s_knee: 0.5 * (coeffs.c - coeffs.a),
            s_zero: lock_in_height(coeffs),
            s_neg_knee: d,
            s_minus_pi: conservative_height(coeffs, d)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparatrixCurve {
    /// Ordered by increasing `θ_e` over `[-π, π]`.
    pub samples: Vec<SeparatrixSample>,
    pub landmarks: Landmarks,
    pub case: StabilityCase,
    pub coeffs: DerivedCoeffs,
}

impl SeparatrixCurve {
    /// Piecewise-linear interpolation of the samples.
    pub fn height_at(&self, theta_e: f64) -> Option<f64> {
        let idx = self.samples.partition_point(|s| s.theta_e < theta_e);
        let hit = self.samples.get(idx)?;
        if hit.theta_e == theta_e {
            return Some(hit.y);
        }
        let left = self.samples.get(idx.checked_sub(1)?)?;
        let w = (theta_e - left.theta_e) / (hit.theta_e - left.theta_e);
        Some(left.y + w * (hit.y - left.y))
    }

    /// Implicit-equation residual of one sample.
    pub fn residual(&self, sample: &SeparatrixSample) -> f64 {
        sample_residual(&self.coeffs, self.landmarks.s_neg_knee, sample)
    }
}

fn domain_error(operation: &'static str, value: f64, lo: f64, hi: f64) -> LockInError {
    LockInError::Domain {
        operation,
        value,
        domain: format!("[{lo}, {hi}]"),
    }
}

/// Separatrix on domain I: the line entering the saddle.
pub fn s_domain1(theta_e: f64, coeffs: &DerivedCoeffs) -> Result<f64> {
    let knee = 1.0 / coeffs.k;
    if !(knee..=PI).contains(&theta_e) {
        return Err(domain_error("s_domain1", theta_e, knee, PI));
    }
    Ok((coeffs.c - coeffs.a) / (2.0 * coeffs.fall_span()) * (PI - theta_e))
}

/// First integral on domain II minus its separatrix level, with `∂/∂y`.
fn domain2_equation(coeffs: &DerivedCoeffs, y: f64, theta: f64) -> (f64, f64) {
    let DerivedCoeffs { a, b, c, k, .. } = *coeffs;
    match coeffs.case {
        StabilityCase::Node => {
            // (y + (a-b)kθ/2)^((b-a)/b) (y + (a+b)kθ/2)^((b+a)/b), in log form
            let near = y + 0.5 * (a - b) * k * theta;
            let far = y + 0.5 * (a + b) * k * theta;
            let ratio = (b * k * theta / near).ln_1p();
            let n = 0.5 * (near.abs().ln() + far.abs().ln() + a / b * ratio);
            let level = 0.5 * (PI.ln() + 2.0 * a / b * (b / c).atanh());
            let slope = 0.5 * ((b - a) / b / near + (b + a) / b / far);
            (n - level, slope)
        }
        StabilityCase::DegenerateNode => {
            let w = 2.0 * theta + a * y;
            let n = 2.0 * theta / w + w.ln();
            let level = a / (2.0 * SQRT_PI) + (a * SQRT_PI).ln();
            (n - level, a * a * y / (w * w))
        }
        StabilityCase::Focus => {
            let q = y * y + a * k * y * theta + k * theta * theta;
            // continuous angle of (bθ, aθ + 2y/k); folds the constant jump at θ = 0
            let angle = if theta == 0.0 {
                0.5 * PI
            } else {
                let base = ((a * theta + 2.0 * y / k) / (b * theta)).atan();
                if theta < 0.0 {
                    base + PI
                } else {
                    base
                }
            };
            let n = 0.5 * q.ln() - a / b * angle;
            let level = 0.5 * PI.ln() - a / b * (c / b).atan();
            (n - level, y / q)
        }
    }
}

/// Residual of the domain-II implicit equation at `(y, θ_e)`.
pub fn domain2_residual(coeffs: &DerivedCoeffs, y: f64, theta_e: f64) -> f64 {
    domain2_equation(coeffs, y, theta_e).0
}

/// Smallest admissible `y` on domain II: above the stable eigenlines and the axis.
fn domain2_floor(coeffs: &DerivedCoeffs, theta: f64) -> f64 {
    if theta >= 0.0 {
        return 0.0;
    }
    match coeffs.case {
        StabilityCase::Node => -0.5 * (coeffs.a + coeffs.b) * coeffs.k * theta,
        StabilityCase::DegenerateNode => -2.0 * theta / coeffs.a,
        StabilityCase::Focus => 0.0,
    }
}

pub fn s_domain2(theta_e: f64, coeffs: &DerivedCoeffs) -> Result<f64> {
    let knee = 1.0 / coeffs.k;
    if !(-knee..=knee).contains(&theta_e) {
        return Err(domain_error("s_domain2", theta_e, -knee, knee));
    }
    if theta_e == 0.0 {
        return Ok(lock_in_height(coeffs));
    }
    MonotoneSolve::default().with_lower_offset(1e-12).solve(
        &format!("s_domain2 (theta_e={theta_e}, {} case)", coeffs.case),
        domain2_floor(coeffs, theta_e),
        |y| domain2_equation(coeffs, y, theta_e),
    )
}

/// Slopes of the saddle `(-π, 0)` eigenlines in domain III: `(q_stable, q_unstable)`,
/// as `y = -q_stable (π + θ)` and `y = q_unstable (π + θ)`.
fn domain3_slopes(coeffs: &DerivedCoeffs) -> (f64, f64) {
    let p2 = 2.0 * coeffs.fall_span();
    ((coeffs.c - coeffs.a) / p2, (coeffs.c + coeffs.a) / p2)
}

fn domain3_equation(coeffs: &DerivedCoeffs, d: f64, y: f64, theta: f64) -> (f64, f64) {
    let DerivedCoeffs { a, c, .. } = *coeffs;
    let (q_s, q_u) = domain3_slopes(coeffs);
    let u = PI + theta;
    let w_minus = (c - a) / c;
    let w_plus = (c + a) / c;
    let upper = y + q_s * u;
    let lower = y - q_u * u;
    let m = 0.5 * (w_minus * upper.ln() + w_plus * lower.ln());
    let level = 0.5 * (w_minus * (d + 0.5 * (c - a)).ln() + w_plus * (d - 0.5 * (c + a)).ln());
    (m - level, 0.5 * (w_minus / upper + w_plus / lower))
}

/// Residual of the domain-III implicit equation at `(y, θ_e)` given `d = S(-1/k)`.
pub fn domain3_residual(coeffs: &DerivedCoeffs, d: f64, y: f64, theta_e: f64) -> f64 {
    domain3_equation(coeffs, d, y, theta_e).0
}

pub fn s_domain3(theta_e: f64, coeffs: &DerivedCoeffs, d: f64) -> Result<f64> {
    let knee = 1.0 / coeffs.k;
    if !(-PI..=-knee).contains(&theta_e) {
        return Err(domain_error("s_domain3", theta_e, -PI, -knee));
    }
    if theta_e == -PI {
        return conservative_height(coeffs, d);
    }
    let (_, q_u) = domain3_slopes(coeffs);
    MonotoneSolve::default().with_lower_offset(1e-12).solve(
        &format!("s_domain3 (theta_e={theta_e}, {} case)", coeffs.case),
        q_u * (PI + theta_e),
        |y| domain3_equation(coeffs, d, y, theta_e),
    )
}

/// Domain that owns `θ_e`; boundaries go to the domain whose formula defines them.
pub fn domain_of(theta_e: f64, k: f64) -> Domain {
    let knee = 1.0 / k;
    if theta_e >= knee {
        Domain::I
    } else if theta_e >= -knee {
        Domain::II
    } else {
        Domain::III
    }
}

/// `S(θ_e)` for any `θ_e ∈ [-π, π]`.
pub fn separatrix_height(theta_e: f64, coeffs: &DerivedCoeffs, d: f64) -> Result<SeparatrixSample> {
    let domain = domain_of(theta_e, coeffs.k);
    let y = match domain {
        Domain::I => s_domain1(theta_e, coeffs)?,
        Domain::II => s_domain2(theta_e, coeffs)?,
        Domain::III => s_domain3(theta_e, coeffs, d)?,
    };
    Ok(SeparatrixSample { theta_e, y, domain })
}

pub fn sample_residual(coeffs: &DerivedCoeffs, d: f64, sample: &SeparatrixSample) -> f64 {
    match sample.domain {
        Domain::I => {
            let line = (coeffs.c - coeffs.a) / (2.0 * coeffs.fall_span()) * (PI - sample.theta_e);
            sample.y - line
        }
        Domain::II => domain2_residual(coeffs, sample.y, sample.theta_e),
        Domain::III => domain3_residual(coeffs, d, sample.y, sample.theta_e),
    }
}

/// Sampling grid over `[-π, π]`: the five landmark abscissae plus interior
/// Chebyshev–Lobatto-style nodes on each of the four segments, clustering
/// toward the segment ends.
pub fn sample_grid(k: f64, n_samples: usize) -> Vec<f64> {
    let knee = 1.0 / k;
    let breaks = [-PI, -knee, 0.0, knee, PI];
    let interior = n_samples.saturating_sub(breaks.len());
    let mut grid = Vec::with_capacity(n_samples);
    for (seg, pair) in breaks.windows(2).enumerate() {
        let count = interior / 4 + usize::from(seg < interior % 4);
        let (lo, hi) = (pair[0], pair[1]);
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        grid.push(lo);
        for j in 1..=count {
            grid.push(mid - half * (PI * j as f64 / (count + 1) as f64).cos());
        }
    }
    grid.push(PI);
    grid
}

pub fn build_curve_dimensionless(coeffs: &DerivedCoeffs, n_samples: usize) -> Result<SeparatrixCurve> {
    if n_samples < 16 {
        return Err(LockInError::Domain {
            operation: "build_curve",
            value: n_samples as f64,
            domain: "n_samples >= 16".into(),
        });
    }
    let landmarks = Landmarks::compute(coeffs)?;
    let samples = sample_grid(coeffs.k, n_samples)
        .into_iter()
        .map(|theta| separatrix_height(theta, coeffs, landmarks.s_neg_knee))
        .collect::<Result<Vec<_>>>()?;
    Ok(SeparatrixCurve {
        samples,
        landmarks,
        case: coeffs.case,
        coeffs: *coeffs,
    })
}

pub fn build_curve(params: &LoopParams, n_samples: usize) -> Result<SeparatrixCurve> {
    params.validate()?;
    build_curve_dimensionless(&params.coeffs(), n_samples)
}
