//! Lock-in and conservative lock-in ranges of second-order type 2 PLLs with a
//! piecewise-linear phase detector characteristic.
//!
//! [`formulas`] holds the closed-form results, [`separatrix`] the analytic
//! saddle separatrix they are built on, and [`simulate`] an independent
//! numerical oracle that recovers the same quantities by direct simulation.

pub mod error;
pub mod formulas;
pub mod lambert;
pub mod model;
pub mod ode;
pub mod roots;
pub mod separatrix;
pub mod simulate;

pub use error::{LockInError, Result};
pub use formulas::{
    best_estimate, conservative_lock_in, estimates, gardner_estimate, huque_stensby_pull_out,
    lock_in_frequency, lock_in_ranges, solve_d, EstimateSet, LockInResult,
};
pub use lambert::lambert_w0;
pub use model::{
    derived_coeffs, equilibria, lyapunov_value, pd_characteristic, pd_derivative, reduced_rhs,
    rhs, DerivedCoeffs, Equilibrium, EquilibriumKind, LoopParams, ReducedState, StabilityCase,
    State,
};
pub use separatrix::{build_curve, Domain, SeparatrixCurve, SeparatrixSample};
pub use simulate::{
    conservative_lock_in_numeric, detect_slip, integrate, integrate_reduced, lock_in_numeric,
    lyapunov_audit, trace_separatrix_numeric, IntegratorOptions, SlipVerdict, StartPoint,
    StepScenario, Trajectory,
};
