use std::f64::consts::PI;

use pll_lockin_core::formulas::{
    conservative_lock_in, d_lower_bound, d_residual, huque_stensby_pull_out, lock_in_frequency,
    lock_in_ranges, solve_d,
};
use pll_lockin_core::model::{
    eigenvalues, equilibria, jacobian, lyapunov_derivative, lyapunov_value, pd_characteristic,
    reduced_rhs, rhs, Eigenvalues, EquilibriumKind, LoopParams, ReducedState, StabilityCase, State,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Physical parameters realizing the dimensionless pair `(a, k)`.
fn params_for(a: f64, k: f64, tau1: f64, k_vco: f64) -> LoopParams {
    let tau2 = a / (k_vco / tau1).sqrt();
    LoopParams::new(tau1, tau2, k_vco, k).unwrap()
}

fn random_params(rng: &mut ChaCha8Rng, case: StabilityCase) -> LoopParams {
    let a: f64 = rng.gen_range(0.3..5.0);
    let k = match case {
        StabilityCase::DegenerateNode => 4.0 / (a * a),
        StabilityCase::Node => {
            let lo = (4.0 / (a * a)).max(1.0 / PI) * 1.01;
            rng.gen_range(lo..lo.max(4.0) * 1.5 + 0.1)
        }
        StabilityCase::Focus => {
            let hi = 4.0 / (a * a) * 0.99;
            let lo = 1.0 / PI * 1.01;
            if hi <= lo {
                return random_params(rng, case);
            }
            rng.gen_range(lo..hi)
        }
    };
    if k <= 1.0 / PI {
        return random_params(rng, case);
    }
    params_for(a, k, rng.gen_range(0.005..0.5), rng.gen_range(10.0..5000.0))
}

const CASES: [StabilityCase; 3] = [StabilityCase::Node, StabilityCase::DegenerateNode, StabilityCase::Focus];

#[test]
fn pd_periodicity_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..1000 {
        let k = rng.gen_range(1.0 / PI + 1e-3..10.0);
        let th = rng.gen_range(-20.0..20.0);
        let v0 = pd_characteristic(th, k).unwrap();
        let v1 = pd_characteristic(th + 2.0 * PI, k).unwrap();
        assert!((v0 - v1).abs() <= 1e-12, "theta {th} k {k}: {v0} vs {v1}");
    }
}

#[test]
fn equilibria_are_fixed_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for case in CASES {
        for _ in 0..30 {
            let p = random_params(&mut rng, case);
            let w = rng.gen_range(-100.0..100.0);
            for eq in equilibria(&p, w, -3..=3).unwrap() {
                let f = rhs(eq.state(), &p, w);
                let scale = 1.0 + w.abs();
                assert!(f.x.hypot(f.theta_e) < 1e-12 * scale, "{eq:?} {f:?}");
            }
        }
    }
}

#[test]
fn eigen_structure_by_case() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for case in [StabilityCase::Node, StabilityCase::Focus] {
        for _ in 0..100 {
            let p = random_params(&mut rng, case);
            let eqs = equilibria(&p, 5.0, 0..=1).unwrap();
            match eigenvalues(jacobian(&p, eqs[0].theta_eq)) {
                Eigenvalues::Real(l1, l2) => {
                    assert_eq!(case, StabilityCase::Node);
                    assert_eq!(eqs[0].kind, EquilibriumKind::StableNode);
                    assert!(l1 < 0.0 && l2 < 0.0);
                }
                Eigenvalues::Complex { re, im } => {
                    assert_eq!(case, StabilityCase::Focus);
                    assert_eq!(eqs[0].kind, EquilibriumKind::StableFocus);
                    assert!(re < 0.0 && im != 0.0);
                }
            }
            assert_eq!(eqs[1].kind, EquilibriumKind::Saddle);
            match eigenvalues(jacobian(&p, eqs[1].theta_eq)) {
                Eigenvalues::Real(l1, l2) => assert!(l1 * l2 < 0.0),
                other => panic!("saddle with {other:?}"),
            }
        }
    }
}

#[test]
fn lyapunov_derivative_matches_finite_difference() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for case in CASES {
        for _ in 0..30 {
            let p = random_params(&mut rng, case);
            let w = rng.gen_range(-50.0..50.0);
            let s = State::new(
                p.equilibrium_x(w) + rng.gen_range(-1.0..1.0) * p.tau1 / p.k_vco * 50.0,
                rng.gen_range(-7.0..7.0),
            );
            let f = rhs(s, &p, w);
            let h = 1e-6 / (1.0 + f.x.abs().max(f.theta_e.abs()) / p.time_scale());
            let fwd = lyapunov_value(State::new(s.x + h * f.x, s.theta_e + h * f.theta_e), &p, w);
            let bwd = lyapunov_value(State::new(s.x - h * f.x, s.theta_e - h * f.theta_e), &p, w);
            let fd = (fwd - bwd) / (2.0 * h);
            let exact = lyapunov_derivative(s, &p);
            let scale = p.k_vco * p.tau2 / p.tau1;
            assert!((fd - exact).abs() < 1e-5 * scale, "{fd} vs {exact}");
        }
    }
}

#[test]
fn lyapunov_period_invariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let p = random_params(&mut rng, StabilityCase::Focus);
        let s = State::new(rng.gen_range(-1.0..1.0), rng.gen_range(-30.0..30.0));
        let v0 = lyapunov_value(s, &p, 3.0);
        let v1 = lyapunov_value(State::new(s.x, s.theta_e + 2.0 * PI), &p, 3.0);
        assert!((v0 - v1).abs() < 1e-10 * (1.0 + v0.abs()));
    }
}

#[test]
fn reduced_chain_rule() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for case in CASES {
        for _ in 0..34 {
            let p = random_params(&mut rng, case);
            let c = p.coeffs();
            let w = rng.gen_range(-50.0..50.0);
            // stay off the breakpoints so the pushforward is smooth
            let mut th = rng.gen_range(-PI..PI);
            if ((th.abs() - 1.0 / p.k) * p.k).abs() < 1e-3 {
                th += 0.01;
            }
            let s = State::new(p.equilibrium_x(w) + rng.gen_range(-0.1..0.1), th);
            let f = rhs(s, &p, w);
            let h = 1e-6 / (1.0 + f.theta_e.abs());
            let ahead = p.to_reduced(State::new(s.x + h * f.x, s.theta_e + h * f.theta_e), w);
            let behind = p.to_reduced(State::new(s.x - h * f.x, s.theta_e - h * f.theta_e), w);
            let scale = p.time_scale();
            let dy = (ahead.y - behind.y) / (2.0 * h) / scale;
            let dth = (ahead.theta_e - behind.theta_e) / (2.0 * h) / scale;
            let r = reduced_rhs(p.to_reduced(s, w), &c);
            assert!((dy - r.y).abs() < 1e-5 * (1.0 + r.y.abs()), "{dy} vs {}", r.y);
            assert!((dth - r.theta_e).abs() < 1e-5 * (1.0 + r.theta_e.abs()));
        }
    }
}

#[test]
fn dimensionless_invariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in CASES {
        for _ in 0..20 {
            let p = random_params(&mut rng, case);
            let a = p.coeffs().a;
            let q = params_for(a, p.k, rng.gen_range(0.005..0.5), rng.gen_range(10.0..5000.0));
            let r1 = lock_in_ranges(&p).unwrap();
            let r2 = lock_in_ranges(&q).unwrap();
            let y = |r: &pll_lockin_core::LockInResult, p: &LoopParams| {
                let a = p.coeffs().a;
                (2.0 * p.tau2 * r.omega_l / a, 2.0 * p.tau2 * r.omega_l_c / a)
            };
            let (l1, c1) = y(&r1, &p);
            let (l2, c2) = y(&r2, &q);
            assert!((l1 - l2).abs() < 1e-10 * l1 && (c1 - c2).abs() < 1e-10 * c1);
        }
    }
}

#[test]
fn heights_and_ordering() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for i in 0..201 {
        let p = random_params(&mut rng, CASES[i % 3]);
        let r = lock_in_ranges(&p).unwrap();
        assert!(r.y_l > PI.sqrt());
        assert!(r.omega_l_c < r.omega_l, "{p:?}: {r:?}");
        assert!(r.omega_l_c > 0.0);
    }
}

#[test]
fn d_residual_and_bounds() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for case in CASES {
        for _ in 0..100 {
            let c = random_params(&mut rng, case).coeffs();
            let d = solve_d(&c).unwrap();
            assert!(d > d_lower_bound(&c));
            assert!(d > (c.c + c.a) / 2.0);
            assert!(d_residual(&c, d).abs() < 1e-10, "{c:?}");
        }
    }
}

#[test]
fn huque_stensby_batch() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut done = 0;
    while done < 50 {
        let a: f64 = rng.gen_range(0.1..(2.0 * PI).sqrt());
        let p = params_for(a, 2.0 / PI, rng.gen_range(0.005..0.5), rng.gen_range(10.0..5000.0));
        let po = huque_stensby_pull_out(&p).unwrap();
        let wl = lock_in_frequency(&p).unwrap().omega_l;
        assert!((po / 2.0 - wl).abs() < 1e-9 * wl);
        done += 1;
    }
    let outside = params_for(2.6, 2.0 / PI, 0.1, 100.0);
    assert!(huque_stensby_pull_out(&outside).is_err());
}

#[test]
fn case_continuity() {
    for a in [0.7, 1.45, 2.5, 4.0] {
        let k0 = 4.0 / (a * a);
        if k0 <= 1.0 / PI {
            continue;
        }
        let base = lock_in_ranges(&params_for(a, k0, 0.0633, 250.0)).unwrap();
        assert_eq!(base.case, StabilityCase::DegenerateNode);
        for sign in [1.0, -1.0] {
            let mut prev = (f64::INFINITY, f64::INFINITY);
            for j in 4..=7 {
                let k = k0 * (1.0 + sign * 10f64.powi(-j));
                let r = lock_in_ranges(&params_for(a, k, 0.0633, 250.0)).unwrap();
                let gap = (
                    ((r.omega_l - base.omega_l) / base.omega_l).abs(),
                    ((r.omega_l_c - base.omega_l_c) / base.omega_l_c).abs(),
                );
                assert!(gap.0 < prev.0 && gap.1 < prev.1, "a {a} j {j}: {gap:?} after {prev:?}");
                prev = gap;
            }
            assert!(prev.0 < 1e-4 && prev.1 < 1e-4);
        }
    }
}

#[test]
fn conservative_height_matches_lock_in_ranges() {
    let p = LoopParams::new(0.0633, 0.0225, 250.0, 2.0 / PI).unwrap();
    let c = conservative_lock_in(&p).unwrap();
    let r = lock_in_ranges(&p).unwrap();
    assert_eq!(c.omega_l_c, r.omega_l_c);
    assert!((p.coeffs().a / (2.0 * p.tau2) * c.y_l_c - c.omega_l_c).abs() < 1e-9 * c.omega_l_c);
}

proptest! {
    #[test]
    fn state_round_trip(x in -10.0f64..10.0, th in -20.0f64..20.0, w in -100.0f64..100.0,
                        a in 0.3f64..5.0, k in 0.33f64..4.0, tau1 in 0.005f64..0.5) {
        let p = params_for(a, k, tau1, 250.0);
        let back = p.from_reduced(p.to_reduced(State::new(x, th), w), w);
        prop_assert!((back.x - x).abs() <= 1e-12 * (1.0 + x.abs() + (p.tau1 * w / p.k_vco).abs()));
        prop_assert_eq!(back.theta_e, th);
    }

    #[test]
    fn coefficient_identity(a in 0.05f64..8.0, k in 0.33f64..10.0) {
        let p = params_for(a, k, 0.1, 100.0);
        let c = p.coeffs();
        prop_assert!((c.c * c.c - c.a * c.a - 4.0 * (PI - 1.0 / k)).abs() < 1e-12 * c.c * c.c);
        prop_assert!(c.c > c.a);
    }

    #[test]
    fn reduced_origin_and_saddle(a in 0.3f64..5.0, k in 0.33f64..4.0) {
        let c = params_for(a, k, 0.1, 100.0).coeffs();
        let o = reduced_rhs(ReducedState::new(0.0, 0.0), &c);
        let s = reduced_rhs(ReducedState::new(0.0, PI), &c);
        prop_assert_eq!((o.y, o.theta_e), (0.0, 0.0));
        prop_assert!(s.y.abs() < 1e-15 && s.theta_e == 0.0);
    }
}
