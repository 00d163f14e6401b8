//! Seeded random parameter sets for the verification batches.

use std::f64::consts::PI;

use pll_lockin_core::{LoopParams, StabilityCase};
use rand::Rng;

pub const CASES: [StabilityCase; 3] = [
    StabilityCase::Node,
    StabilityCase::DegenerateNode,
    StabilityCase::Focus,
];

/// Physical parameters with the dimensionless pair `(a, k)`. The time constant
/// and gain only rescale time and frequency.
pub fn params_for(a: f64, k: f64, tau1: f64, k_vco: f64) -> LoopParams {
    LoopParams {
        tau1,
        tau2: a / (k_vco / tau1).sqrt(),
        k_vco,
        k,
    }
}

/// Draws a parameter set in the given case with `a ∈ [0.3, 5]`, `k ∈ (1/π, 4]`.
pub fn random_params<R: Rng>(rng: &mut R, case: StabilityCase) -> LoopParams {
    let k_min = 1.05 / PI;
    let (a, k) = match case {
        StabilityCase::Node => {
            let a: f64 = rng.gen_range(1.05..5.0);
            let lo = (4.0 / (a * a)).max(k_min) * 1.05;
            (a, rng.gen_range(lo..=4.0))
        }
        StabilityCase::DegenerateNode => {
            let a: f64 = rng.gen_range(1.0..3.3);
            (a, 4.0 / (a * a))
        }
        StabilityCase::Focus => {
            let a: f64 = rng.gen_range(0.3..3.3);
            let hi = (4.0 / (a * a)).min(4.0) * 0.95;
            (a, rng.gen_range(k_min..hi))
        }
    };
    params_for(a, k, rng.gen_range(0.01..0.2), rng.gen_range(50.0..1000.0))
}
