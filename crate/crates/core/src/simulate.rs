//! Numerical oracle: trajectories of the baseband and reduced systems,
//! cycle-slip classification, frequency-step bisection for the lock-in
//! boundaries, and backward tracing of the saddle separatrix.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{LockInError, Result};
use crate::formulas::gardner_estimate;
use crate::model::{
    lyapunov_value, reduced_rhs, rhs, DerivedCoeffs, Equilibrium, EquilibriumKind, LoopParams,
    ReducedState, StabilityCase, State,
};
use crate::ode::{Dopri5, OdeTolerances, Step};

/// Fraction of the integration span treated as the tail for the limsup metric.
pub const LIMSUP_WINDOW: f64 = 0.1;
/// Offset from the saddle used to seed the backward separatrix trace.
pub const SADDLE_OFFSET: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Largest step, in the trajectory's time unit. `None` picks a value from the loop.
    pub max_step: Option<f64>,
    /// Integration horizon. `None` picks a value from the slowest decay rate.
    pub t_max: Option<f64>,
    /// Lock is declared within this distance of a stable equilibrium, measured
    /// in reduced coordinates `(y, θ_e)`. Zero disables lock detection.
    pub convergence_radius: f64,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        IntegratorOptions {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_step: None,
            t_max: None,
            convergence_radius: 1e-6,
        }
    }
}

impl IntegratorOptions {
    pub fn validate(&self) -> Result<()> {
        let positive = |name, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(LockInError::InvalidParameter {
                    name,
                    value: v,
                    constraint: "finite and > 0",
                })
            }
        };
        positive("rel_tol", self.rel_tol)?;
        positive("abs_tol", self.abs_tol)?;
        if let Some(h) = self.max_step {
            positive("max_step", h)?;
        }
        if let Some(t) = self.t_max {
            positive("t_max", t)?;
        }
        if self.convergence_radius.is_nan() || self.convergence_radius < 0.0 {
            return Err(LockInError::InvalidParameter {
                name: "convergence_radius",
                value: self.convergence_radius,
                constraint: ">= 0",
            });
        }
        Ok(())
    }

    fn tolerances(&self, default_max_step: f64) -> OdeTolerances {
        OdeTolerances {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_step: self.max_step.unwrap_or(default_max_step),
        }
    }
}

/// Slowest decay rate at the stable equilibria, per unit of reduced time.
pub fn slowest_decay_rate(coeffs: &DerivedCoeffs) -> f64 {
    match coeffs.case {
        // (a - b) k / 2 rewritten as 2 / (a + b) to avoid cancellation
        StabilityCase::Node => 2.0 / (coeffs.a + coeffs.b),
        StabilityCase::DegenerateNode | StabilityCase::Focus => 0.5 * coeffs.a * coeffs.k,
    }
}

/// Default horizon in reduced time: ample for the slowest mode to decay below
/// any lock radius, plus room for saddle passages.
pub fn default_reduced_t_max(coeffs: &DerivedCoeffs) -> f64 {
    200.0 + 50.0 / slowest_decay_rate(coeffs)
}

const REDUCED_MAX_STEP: f64 = 0.5;

/// A state type carrying the unwrapped phase error.
pub trait PhaseState: Copy {
    fn theta_e(&self) -> f64;
}

impl PhaseState for State {
    fn theta_e(&self) -> f64 {
        self.theta_e
    }
}

impl PhaseState for ReducedState {
    fn theta_e(&self) -> f64 {
        self.theta_e
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint<S> {
    pub t: f64,
    pub state: S,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory<S> {
    pub points: Vec<TrajectoryPoint<S>>,
    /// `sup_t |θ_e(0) - θ_e(t)|` over the samples.
    pub sup_deviation: f64,
    /// Sup of the deviation over the trailing window of the span.
    pub limsup_deviation: f64,
    /// Equilibrium the trajectory locked to. For reduced trajectories `x_eq`
    /// holds the reduced coordinate `y = 0`.
    pub converged_to: Option<Equilibrium>,
    pub lock_time: Option<f64>,
    /// Radius used for lock detection, also the slack on the 2π slip threshold.
    pub lock_radius: f64,
}

impl<S: PhaseState> Trajectory<S> {
    fn assemble(
        points: Vec<TrajectoryPoint<S>>,
        converged_to: Option<Equilibrium>,
        lock_time: Option<f64>,
        lock_radius: f64,
    ) -> Self {
        let theta0 = points[0].state.theta_e();
        let t_end = points.last().map_or(0.0, |p| p.t);
        let t0 = points[0].t;
        let tail_start = t_end - LIMSUP_WINDOW * (t_end - t0);
        let mut sup: f64 = 0.0;
        let mut limsup: f64 = 0.0;
        for p in &points {
            let dev = (theta0 - p.state.theta_e()).abs();
            sup = sup.max(dev);
            if p.t >= tail_start {
                limsup = limsup.max(dev);
            }
        }
        Trajectory {
            points,
            sup_deviation: sup,
            limsup_deviation: limsup,
            converged_to,
            lock_time,
            lock_radius,
        }
    }

    pub fn initial(&self) -> S {
        self.points[0].state
    }

    pub fn last(&self) -> S {
        self.points[self.points.len() - 1].state
    }

    pub fn t_end(&self) -> f64 {
        self.points[self.points.len() - 1].t
    }
}

fn locked_equilibrium(y: f64, theta: f64, radius: f64, x_eq: f64, kind: EquilibriumKind) -> Option<Equilibrium> {
    if radius <= 0.0 {
        return None;
    }
    let m = (theta / TAU).round();
    let gap = theta - TAU * m;
    if y.hypot(gap) < radius {
        Some(Equilibrium {
            x_eq,
            theta_eq: TAU * m,
            m: 2 * m as i64,
            kind,
        })
    } else {
        None
    }
}

fn stable_kind(case: StabilityCase) -> EquilibriumKind {
    match case {
        StabilityCase::Node => EquilibriumKind::StableNode,
        StabilityCase::DegenerateNode => EquilibriumKind::StableDegenerateNode,
        StabilityCase::Focus => EquilibriumKind::StableFocus,
    }
}

/// Shared driver: integrates until `t_max` or lock, and after a lock keeps
/// going until the post-lock part fills the trailing window.
#[allow(clippy::too_many_arguments)]
fn run<const N: usize, S, F, L>(
    f: F,
    y0: [f64; N],
    tol: OdeTolerances,
    t_max: f64,
    min_tail: f64,
    to_state: impl Fn(&[f64; N]) -> S,
    lock: L,
    radius: f64,
) -> Result<Trajectory<S>>
where
    S: PhaseState,
    F: FnMut(f64, &[f64; N]) -> [f64; N],
    L: Fn(&[f64; N]) -> Option<Equilibrium>,
{
    let mut points = vec![TrajectoryPoint {
        t: 0.0,
        state: to_state(&y0),
    }];
    let mut converged = lock(&y0);
    let mut lock_time = converged.map(|_| 0.0);
    let mut t_end = match lock_time {
        Some(t) => tail_end(t, min_tail),
        None => t_max,
    };
    let mut solver = Dopri5::new(f, 0.0, y0, tol);
    while solver.t() < t_end {
        let step = solver.step(t_end)?;
        points.push(TrajectoryPoint {
            t: step.t1,
            state: to_state(&step.y1),
        });
        if lock_time.is_none() {
            if let Some(eq) = lock(&step.y1) {
                converged = Some(eq);
                lock_time = Some(step.t1);
                t_end = tail_end(step.t1, min_tail);
            }
        }
    }
    Ok(Trajectory::assemble(points, converged, lock_time, radius))
}

/// End time such that `[t_lock, t_end]` is the trailing window of `[0, t_end]`.
fn tail_end(t_lock: f64, min_tail: f64) -> f64 {
    (t_lock / (1.0 - LIMSUP_WINDOW)).max(t_lock + min_tail)
}

/// Integrates the baseband ODE (time in seconds) from `initial`.
pub fn integrate(
    params: &LoopParams,
    omega_e_free: f64,
    initial: State,
    opts: &IntegratorOptions,
) -> Result<Trajectory<State>> {
    params.validate()?;
    opts.validate()?;
    let coeffs = params.coeffs();
    let scale = params.time_scale();
    let t_max = opts.t_max.unwrap_or(default_reduced_t_max(&coeffs) / scale);
    let tol = opts.tolerances(REDUCED_MAX_STEP / scale);
    let kind = stable_kind(coeffs.case);
    let x_eq = params.equilibrium_x(omega_e_free);
    let radius = opts.convergence_radius;
    let p = *params;
    run(
        move |_, s: &[f64; 2]| {
            let d = rhs(State::new(s[0], s[1]), &p, omega_e_free);
            [d.x, d.theta_e]
        },
        [initial.x, initial.theta_e],
        tol,
        t_max,
        1.0 / scale,
        |s| State::new(s[0], s[1]),
        |s| {
            let r = p.to_reduced(State::new(s[0], s[1]), omega_e_free);
            locked_equilibrium(r.y, r.theta_e, radius, x_eq, kind)
        },
        radius,
    )
}

/// Integrates the reduced system (dimensionless time) from `initial`.
pub fn integrate_reduced(
    coeffs: &DerivedCoeffs,
    initial: ReducedState,
    opts: &IntegratorOptions,
) -> Result<Trajectory<ReducedState>> {
    opts.validate()?;
    let t_max = opts.t_max.unwrap_or(default_reduced_t_max(coeffs));
    let tol = opts.tolerances(REDUCED_MAX_STEP);
    let kind = stable_kind(coeffs.case);
    let radius = opts.convergence_radius;
    let c = *coeffs;
    run(
        move |_, s: &[f64; 2]| {
            let d = reduced_rhs(ReducedState::new(s[0], s[1]), &c);
            [d.y, d.theta_e]
        },
        [initial.y, initial.theta_e],
        tol,
        t_max,
        1.0,
        |s| ReducedState::new(s[0], s[1]),
        |s| locked_equilibrium(s[0], s[1], radius, 0.0, kind),
        radius,
    )
}

/// Which equilibrium of the pre-step system the loop sits in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartPoint {
    /// `θ_e = 0`.
    Stable,
    /// `θ_e = -π`, used for the conservative range.
    Saddle,
}

/// Abrupt change of the frequency error with the loop initially at equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepScenario {
    pub omega_before: f64,
    pub omega_after: f64,
    pub start_at: StartPoint,
}

impl StepScenario {
    /// Symmetric step `-ω → +ω`.
    pub fn symmetric(omega: f64, start_at: StartPoint) -> Self {
        StepScenario {
            omega_before: -omega,
            omega_after: omega,
            start_at,
        }
    }

    pub fn initial_state(&self, params: &LoopParams) -> State {
        let theta = match self.start_at {
            StartPoint::Stable => 0.0,
            StartPoint::Saddle => -PI,
        };
        State::new(params.equilibrium_x(self.omega_before), theta)
    }

    pub fn run(&self, params: &LoopParams, opts: &IntegratorOptions) -> Result<Trajectory<State>> {
        integrate(params, self.omega_after, self.initial_state(params), opts)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlipVerdict {
    /// `sup |θ_e(0) - θ_e(t)| ≥ 2π`.
    pub slipped_sup: bool,
    /// Tail-window verdict; `None` when the trajectory never locked.
    pub slipped_limsup: Option<bool>,
    pub diagnostic: Option<String>,
}

impl SlipVerdict {
    /// Sup-metric verdict, with undecided runs counted as slips.
    pub fn slipped(&self) -> bool {
        self.slipped_sup || self.slipped_limsup.is_none()
    }

    /// `sup ≥ 2π` while `limsup < 2π`.
    pub fn in_gap_regime(&self) -> bool {
        self.slipped_sup && self.slipped_limsup == Some(false)
    }
}

/// Classifies a trajectory under the sup and limsup slip metrics.
///
/// A deviation within the lock radius of 2π counts as 2π: trajectories that
/// settle onto the neighbouring equilibrium approach it from below.
pub fn detect_slip<S: PhaseState>(traj: &Trajectory<S>) -> SlipVerdict {
    let threshold = TAU - traj.lock_radius;
    let slipped_sup = traj.sup_deviation >= threshold;
    if traj.converged_to.is_some() {
        SlipVerdict {
            slipped_sup,
            slipped_limsup: Some(traj.limsup_deviation >= threshold),
            diagnostic: None,
        }
    } else {
        SlipVerdict {
            slipped_sup,
            slipped_limsup: None,
            diagnostic: Some(format!(
                "no lock within t = {} (last theta_e = {})",
                traj.t_end(),
                traj.last().theta_e()
            )),
        }
    }
}

fn bisect_boundary<P>(label: &str, start_hi: f64, bisect_tol: f64, slipped: P) -> Result<f64>
where
    P: Fn(f64) -> Result<bool>,
{
    if bisect_tol.is_nan() || bisect_tol <= 0.0 {
        return Err(LockInError::InvalidParameter {
            name: "bisect_tol",
            value: bisect_tol,
            constraint: "> 0",
        });
    }
    // ω = 0 is trivially slip-free; it is never probed
    let mut lo = 0.0;
    let mut hi = start_hi;
    let mut grown = 1.0;
    while !slipped(hi)? {
        lo = hi;
        grown *= 2.0;
        if grown > 16.0 {
            return Err(LockInError::Search(format!(
                "{label}: no cycle slip up to omega = {hi}"
            )));
        }
        hi *= 2.0;
    }
    while hi - lo > bisect_tol {
        let mid = 0.5 * (lo + hi);
        if slipped(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Largest symmetric step `-ω → +ω` from the stable equilibrium that re-locks
/// without a cycle slip.
pub fn lock_in_numeric(params: &LoopParams, opts: &IntegratorOptions, bisect_tol: f64) -> Result<f64> {
    params.validate()?;
    bisect_boundary("lock_in_numeric", 4.0 * gardner_estimate(params), bisect_tol, |w| {
        let traj = StepScenario::symmetric(w, StartPoint::Stable).run(params, opts)?;
        Ok(detect_slip(&traj).slipped())
    })
}

/// Same search with the loop starting on the saddle `θ_e = -π`.
pub fn conservative_lock_in_numeric(
    params: &LoopParams,
    opts: &IntegratorOptions,
    bisect_tol: f64,
) -> Result<f64> {
    params.validate()?;
    bisect_boundary(
        "conservative_lock_in_numeric",
        4.0 * gardner_estimate(params),
        bisect_tol,
        |w| {
            let traj = StepScenario::symmetric(w, StartPoint::Saddle).run(params, opts)?;
            Ok(detect_slip(&traj).slipped())
        },
    )
}

fn push_crossing(points: &mut Vec<TrajectoryPoint<ReducedState>>, step: &Step<2>, target: f64) {
    let t = step.locate(|s| s[1] - target);
    let s = step.interpolate(t);
    points.push(TrajectoryPoint {
        t,
        state: ReducedState::new(s[0], target),
    });
}

/// Traces the upper separatrix of `(π, 0)` backwards in time, from a seed `offset`
/// away from the saddle along its incoming eigenvector, until `θ_e = -π`.
///
/// The returned time axis is reversed time. The trace contains exact
/// crossing points at `θ_e ∈ {1/k, 0, -1/k, -π}`.
pub fn trace_separatrix_from(
    coeffs: &DerivedCoeffs,
    opts: &IntegratorOptions,
    offset: f64,
) -> Result<Trajectory<ReducedState>> {
    opts.validate()?;
    let slope = (coeffs.c - coeffs.a) / (2.0 * coeffs.fall_span());
    let norm = slope.hypot(1.0);
    let seed = [offset * slope / norm, PI - offset / norm];
    let c = *coeffs;
    let back = move |_: f64, s: &[f64; 2]| {
        let d = reduced_rhs(ReducedState::new(s[0], s[1]), &c);
        [-d.y, -d.theta_e]
    };
    let tol = opts.tolerances(REDUCED_MAX_STEP);
    let t_max = opts.t_max.unwrap_or(default_reduced_t_max(coeffs) + 40.0 / slope.max(1e-3));
    let knee = 1.0 / coeffs.k;
    let mut targets = vec![knee, 0.0, -knee, -PI].into_iter().peekable();

    let mut points = vec![TrajectoryPoint {
        t: 0.0,
        state: ReducedState::new(seed[0], seed[1]),
    }];
    let mut solver = Dopri5::new(back, 0.0, seed, tol);
    while let Some(&target) = targets.peek() {
        if solver.t() >= t_max {
            return Err(LockInError::Integrator {
                t: solver.t(),
                detail: format!("separatrix trace did not reach theta_e = {target}"),
            });
        }
        let step = solver.step(t_max)?;
        if step.y1[0] <= 0.0 {
            return Err(LockInError::numeric(
                "trace_separatrix_numeric",
                format!("trace left the upper half-plane at theta_e = {}", step.y1[1]),
            ));
        }
        while let Some(&target) = targets.peek() {
            if step.y1[1] > target {
                break;
            }
            push_crossing(&mut points, &step, target);
            targets.next();
        }
        if targets.peek().is_some() && points.last().is_none_or(|p| p.t < step.t1) {
            points.push(TrajectoryPoint {
                t: step.t1,
                state: ReducedState::new(step.y1[0], step.y1[1]),
            });
        }
    }
    Ok(Trajectory::assemble(points, None, None, 0.0))
}

/// Backward trace with the default saddle offset.
pub fn trace_separatrix_numeric(params: &LoopParams, opts: &IntegratorOptions) -> Result<Trajectory<ReducedState>> {
    params.validate()?;
    trace_separatrix_from(&params.coeffs(), opts, SADDLE_OFFSET)
}

/// Numerically traced separatrix heights at the landmark abscissae.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NumericLandmarks {
    pub s_knee: f64,
    pub s_zero: f64,
    pub s_neg_knee: f64,
    pub s_minus_pi: f64,
    /// Largest relative change of a landmark when the seed offset shrinks tenfold.
    pub offset_sensitivity: f64,
}

fn landmarks_of(trace: &Trajectory<ReducedState>, knee: f64) -> Result<[f64; 4]> {
    let find = |target: f64| {
        trace
            .points
            .iter()
            .find(|p| p.state.theta_e == target)
            .map(|p| p.state.y)
            .ok_or_else(|| LockInError::numeric("separatrix landmarks", format!("no point at theta_e = {target}")))
    };
    Ok([find(knee)?, find(0.0)?, find(-knee)?, find(-PI)?])
}

pub fn separatrix_landmarks_numeric(coeffs: &DerivedCoeffs, opts: &IntegratorOptions) -> Result<NumericLandmarks> {
    let knee = 1.0 / coeffs.k;
    let coarse = landmarks_of(&trace_separatrix_from(coeffs, opts, SADDLE_OFFSET)?, knee)?;
    let fine = landmarks_of(&trace_separatrix_from(coeffs, opts, SADDLE_OFFSET / 10.0)?, knee)?;
    let sensitivity = coarse
        .iter()
        .zip(&fine)
        .map(|(c, f)| ((c - f) / f).abs())
        .fold(0.0, f64::max);
    Ok(NumericLandmarks {
        s_knee: fine[0],
        s_zero: fine[1],
        s_neg_knee: fine[2],
        s_minus_pi: fine[3],
        offset_sensitivity: sensitivity,
    })
}

/// Largest increase of the Lyapunov function between consecutive samples.
pub fn lyapunov_audit(traj: &Trajectory<State>, params: &LoopParams, omega_e_free: f64) -> f64 {
    traj.points
        .windows(2)
        .map(|w| lyapunov_value(w[1].state, params, omega_e_free) - lyapunov_value(w[0].state, params, omega_e_free))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::equilibria;

    fn fig3() -> LoopParams {
        LoopParams::new(0.0633, 0.0225, 250.0, 2.0 / PI).unwrap()
    }

    #[test]
    fn equilibrium_is_a_fixed_point() {
        let p = fig3();
        let w = 30.0;
        let eq = equilibria(&p, w, 0..=0).unwrap()[0];
        let opts = IntegratorOptions {
            convergence_radius: 0.0,
            t_max: Some(0.5),
            ..Default::default()
        };
        let traj = integrate(&p, w, eq.state(), &opts).unwrap();
        for pt in &traj.points {
            assert!((pt.state.x - eq.x_eq).abs() < 1e-9 && pt.state.theta_e.abs() < 1e-9);
        }
        assert!(traj.points.windows(2).all(|w| w[0].t < w[1].t));
        assert_eq!(lyapunov_audit(&traj, &p, w), 0.0);
    }

    #[test]
    fn fig3_below_and_above() {
        let p = fig3();
        let opts = IntegratorOptions::default();
        let calm = StepScenario::symmetric(69.0, StartPoint::Stable).run(&p, &opts).unwrap();
        let v = detect_slip(&calm);
        assert!(!v.slipped_sup && v.slipped_limsup == Some(false));
        assert!(calm.sup_deviation < TAU);
        assert_eq!(calm.converged_to.unwrap().m, 0);

        let slip = StepScenario::symmetric(86.0, StartPoint::Stable).run(&p, &opts).unwrap();
        let v = detect_slip(&slip);
        assert!(v.slipped_sup && v.slipped_limsup == Some(true));
        assert_eq!(slip.converged_to.unwrap().m, 2);
    }

    #[test]
    fn trivial_slip_verdicts() {
        let mk = |thetas: &[f64], locked: bool| {
            let points = thetas
                .iter()
                .enumerate()
                .map(|(i, &th)| TrajectoryPoint {
                    t: i as f64,
                    state: ReducedState::new(0.0, th),
                })
                .collect();
            let eq = locked.then_some(Equilibrium {
                x_eq: 0.0,
                theta_eq: 0.0,
                m: 0,
                kind: EquilibriumKind::StableFocus,
            });
            Trajectory::assemble(points, eq, None, 1e-6)
        };
        let v = detect_slip(&mk(&[0.0, 1.0, 2.0, 1.0, 0.0], true));
        assert_eq!((v.slipped_sup, v.slipped_limsup), (false, Some(false)));
        let mut gap: Vec<f64> = vec![0.0, 3.0, 6.5, 4.0, 2.0];
        gap.extend(std::iter::repeat_n(0.5, 20));
        let v = detect_slip(&mk(&gap, true));
        assert!(v.in_gap_regime());
        let drift: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let v = detect_slip(&mk(&drift, true));
        assert_eq!((v.slipped_sup, v.slipped_limsup), (true, Some(true)));
        let v = detect_slip(&mk(&[0.0, 1.0], false));
        assert!(v.slipped_limsup.is_none() && v.diagnostic.is_some() && v.slipped());
    }

    #[test]
    fn sup_dominates_limsup() {
        let p = fig3();
        let opts = IntegratorOptions::default();
        for w in [10.0, 50.0, 80.0, 90.0, 200.0] {
            for start in [StartPoint::Stable, StartPoint::Saddle] {
                let traj = StepScenario::symmetric(w, start).run(&p, &opts).unwrap();
                assert!(traj.sup_deviation >= traj.limsup_deviation);
            }
        }
    }

    #[test]
    fn scenario_starts_at_equilibrium() {
        let p = fig3();
        for start in [StartPoint::Stable, StartPoint::Saddle] {
            let s = StepScenario::symmetric(70.0, start);
            let f = rhs(s.initial_state(&p), &p, s.omega_before);
            assert!(f.x.abs() < 1e-12 && f.theta_e.abs() < 1e-12 * 70.0);
        }
    }

    #[test]
    fn numeric_trace_hits_landmarks() {
        let c = fig3().coeffs();
        let lm = separatrix_landmarks_numeric(&c, &IntegratorOptions { rel_tol: 1e-11, abs_tol: 1e-13, ..Default::default() }).unwrap();
        let analytic = crate::separatrix::Landmarks::compute(&c).unwrap();
        assert!(((lm.s_knee - analytic.s_knee) / analytic.s_knee).abs() < 1e-6);
        assert!(((lm.s_zero - analytic.s_zero) / analytic.s_zero).abs() < 1e-5);
        assert!(((lm.s_minus_pi - analytic.s_minus_pi) / analytic.s_minus_pi).abs() < 1e-5);
        assert!(lm.offset_sensitivity < 1e-6);
    }

    #[test]
    fn bad_options_rejected() {
        let p = fig3();
        let opts = IntegratorOptions { rel_tol: 0.0, ..Default::default() };
        assert!(integrate(&p, 1.0, State::default(), &opts).is_err());
        assert!(lock_in_numeric(&p, &IntegratorOptions::default(), 0.0).is_err());
    }
}
