use std::f64::consts::PI;

use pll_lockin_core::formulas::lock_in_ranges;
use pll_lockin_core::model::{equilibria, lyapunov_value, LoopParams, ReducedState, State};
use pll_lockin_core::separatrix::{build_curve, Landmarks};
use pll_lockin_core::simulate::{
    conservative_lock_in_numeric, detect_slip, integrate, integrate_reduced, lock_in_numeric,
    lyapunov_audit, separatrix_landmarks_numeric, IntegratorOptions, StepScenario,
};
use pll_lockin_core::{estimates, gardner_estimate, LockInError, StabilityCase};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{
    CommandConfig, PortraitConfig, RunConfig, SimulateConfig, SimulateMode, SweepConfig,
    VerifyConfig,
};
use crate::error::{CliError, CliResult};
use crate::output::{Cell, Table};
use crate::sampling::{random_params, CASES};

pub const ORACLE_REL_TOL: f64 = 5e-3;
pub const SEPARATRIX_REL_TOL: f64 = 1e-5;
pub const LYAPUNOV_REL_TOL: f64 = 1e-6;

fn rel_diff(estimate: f64, exact: f64) -> f64 {
    (estimate - exact) / exact
}

pub fn analyze(params: &LoopParams, omega: Option<f64>) -> CliResult<Table> {
    params.validate()?;
    let c = params.coeffs();
    let r = lock_in_ranges(params)?;
    let est = estimates(params)?;
    let eqs = equilibria(params, omega.unwrap_or(0.0), 0..=1)?;
    let hs_lock_in = est.huque_stensby_pull_out.map(|po| po / 2.0);
    Ok(Table::record(vec![
        ("tau1", params.tau1.into()),
        ("tau2", params.tau2.into()),
        ("k_vco", params.k_vco.into()),
        ("k", params.k.into()),
        ("a", c.a.into()),
        ("b", c.b.into()),
        ("c", c.c.into()),
        ("a2k", (c.a * c.a * c.k).into()),
        ("case", r.case.to_string().into()),
        ("stable_kind", eqs[0].kind.to_string().into()),
        ("saddle_kind", eqs[1].kind.to_string().into()),
        ("omega", omega.into()),
        ("x_eq", omega.map(|w| params.equilibrium_x(w)).into()),
        ("omega_l", r.omega_l.into()),
        ("omega_l_c", r.omega_l_c.into()),
        ("d", r.d.into()),
        ("y_l", r.y_l.into()),
        ("y_l_c", r.y_l_c.into()),
        ("gardner", est.gardner.into()),
        ("best_pull_out_based", est.best_pull_out_based.into()),
        ("huque_stensby_pull_out", est.huque_stensby_pull_out.into()),
        ("huque_stensby_lock_in", hs_lock_in.into()),
        ("gardner_rel_diff", rel_diff(est.gardner, r.omega_l).into()),
        ("best_rel_diff", rel_diff(est.best_pull_out_based, r.omega_l).into()),
        ("huque_stensby_rel_diff", hs_lock_in.map(|w| rel_diff(w, r.omega_l)).into()),
    ]))
}

pub fn simulate(cfg: &SimulateConfig) -> CliResult<(Table, String)> {
    let p = &cfg.params;
    let opts = IntegratorOptions {
        rel_tol: cfg.rel_tol,
        abs_tol: cfg.abs_tol,
        t_max: cfg.t_max,
        ..Default::default()
    };
    let initial = match cfg.mode {
        SimulateMode::Step { omega_before, start } => StepScenario {
            omega_before,
            omega_after: cfg.omega,
            start_at: start,
        }
        .initial_state(p),
        SimulateMode::Free { x0, theta0 } => State::new(x0, theta0),
    };
    let traj = integrate(p, cfg.omega, initial, &opts)?;
    let mut table = Table::new(vec!["t", "x", "theta_e", "y", "v", "sup_dev"]);
    let theta0 = initial.theta_e;
    let mut sup: f64 = 0.0;
    for pt in &traj.points {
        sup = sup.max((theta0 - pt.state.theta_e).abs());
        let y = p.to_reduced(pt.state, cfg.omega).y;
        table.push(vec![
            pt.t.into(),
            pt.state.x.into(),
            pt.state.theta_e.into(),
            y.into(),
            lyapunov_value(pt.state, p, cfg.omega).into(),
            sup.into(),
        ]);
    }
    let verdict = detect_slip(&traj);
    let lock = match traj.converged_to {
        Some(eq) => format!("locked to theta_e = {} at t = {}", eq.theta_eq, traj.lock_time.unwrap_or(0.0)),
        None => "no lock".to_string(),
    };
    let limsup = match verdict.slipped_limsup {
        Some(s) => s.to_string(),
        None => "indeterminate".into(),
    };
    let summary = format!(
        "{lock}; sup_dev = {}, limsup_dev = {}; slipped (sup) = {}, slipped (limsup) = {limsup}",
        traj.sup_deviation, traj.limsup_deviation, verdict.slipped_sup
    );
    Ok((table, summary))
}

pub const PORTRAIT_COLUMNS: [&str; 6] = ["kind", "series", "t", "theta_e", "y", "domain"];

pub fn portrait(cfg: &PortraitConfig) -> CliResult<Table> {
    let p = &cfg.params;
    p.validate()?;
    let coeffs = p.coeffs();
    let curve = build_curve(p, cfg.n_samples)?;
    let lm = curve.landmarks;
    let y_max = cfg.y_max.unwrap_or(1.5 * lm.s_zero);

    let linspace = |lo: f64, hi: f64, n: usize| -> Vec<f64> {
        if n == 1 {
            vec![0.5 * (lo + hi)]
        } else {
            (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
        }
    };
    let seeds: Vec<(f64, f64)> = linspace(-PI, PI, cfg.n_theta)
        .into_iter()
        .flat_map(|th| linspace(-y_max, y_max, cfg.n_y).into_iter().map(move |y| (th, y)))
        .collect();
    let opts = IntegratorOptions {
        t_max: Some(cfg.duration),
        max_step: Some(0.02),
        convergence_radius: 0.0,
        ..Default::default()
    };
    let trajectories = seeds
        .par_iter()
        .map(|&(th, y)| integrate_reduced(&coeffs, ReducedState::new(y, th), &opts))
        .collect::<Result<Vec<_>, LockInError>>()?;

    let mut table = Table::new(PORTRAIT_COLUMNS.to_vec());
    for (i, traj) in trajectories.iter().enumerate() {
        let series = format!("traj_{i:04}");
        for pt in &traj.points {
            table.push(vec![
                "trajectory".into(),
                series.clone().into(),
                pt.t.into(),
                pt.state.theta_e.into(),
                pt.state.y.into(),
                Cell::Null,
            ]);
        }
    }
    for s in &curve.samples {
        table.push(vec![
            "separatrix".into(),
            "upper".into(),
            Cell::Null,
            s.theta_e.into(),
            s.y.into(),
            s.domain.to_string().into(),
        ]);
    }
    for (name, th, y) in [("y_l", 0.0, lm.s_zero), ("y_l_c", -PI, lm.s_minus_pi)] {
        table.push(vec!["landmark".into(), name.into(), Cell::Null, th.into(), y.into(), Cell::Null]);
    }
    Ok(table)
}

pub fn sweep(cfg: &SweepConfig) -> CliResult<Table> {
    let mut grid = Vec::new();
    for &tau1 in &cfg.tau1 {
        for &tau2 in &cfg.tau2 {
            for &k_vco in &cfg.k_vco {
                for &k in &cfg.k {
                    grid.push(LoopParams::new(tau1, tau2, k_vco, k)?);
                }
            }
        }
    }
    let rows = grid
        .par_iter()
        .map(|p| -> CliResult<Vec<Cell>> {
            let c = p.coeffs();
            let r = lock_in_ranges(p)?;
            let est = estimates(p)?;
            Ok(vec![
                p.tau1.into(),
                p.tau2.into(),
                p.k_vco.into(),
                p.k.into(),
                c.a.into(),
                (c.a * c.a * c.k).into(),
                r.case.to_string().into(),
                r.omega_l.into(),
                r.omega_l_c.into(),
                r.d.into(),
                r.y_l.into(),
                r.y_l_c.into(),
                est.gardner.into(),
                est.best_pull_out_based.into(),
                est.huque_stensby_pull_out.into(),
            ])
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut table = Table::new(vec![
        "tau1", "tau2", "k_vco", "k", "a", "a2k", "case", "omega_l", "omega_l_c", "d", "y_l",
        "y_l_c", "gardner", "best_pull_out_based", "huque_stensby_pull_out",
    ]);
    for row in rows {
        table.push(row);
    }
    Ok(table)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub set: usize,
    pub name: &'static str,
    pub case: StabilityCase,
    pub a: f64,
    pub k: f64,
    pub expected: f64,
    pub observed: f64,
    pub error: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.error < self.tolerance
    }
}

struct VerifySet {
    params: LoopParams,
    omega: f64,
    initial: ReducedState,
}

fn verify_one(i: usize, set: &VerifySet, bisect_rel_tol: f64) -> Result<Vec<Check>, LockInError> {
    let p = &set.params;
    let c = p.coeffs();
    let exact = lock_in_ranges(p)?;
    let opts = IntegratorOptions::default();
    let tol = bisect_rel_tol * gardner_estimate(p);
    let check = |name, expected: f64, observed: f64, error: f64, tolerance| Check {
        set: i,
        name,
        case: c.case,
        a: c.a,
        k: c.k,
        expected,
        observed,
        error,
        tolerance,
    };
    let rel = |obs: f64, exp: f64| ((obs - exp) / exp).abs();

    let wl = lock_in_numeric(p, &opts, tol)?;
    let wc = conservative_lock_in_numeric(p, &opts, tol)?;

    let trace_opts = IntegratorOptions { rel_tol: 1e-11, abs_tol: 1e-13, ..Default::default() };
    let num = separatrix_landmarks_numeric(&c, &trace_opts)?;
    let ana = Landmarks::compute(&c)?;
    let sep_err = [
        rel(num.s_knee, ana.s_knee),
        rel(num.s_zero, ana.s_zero),
        rel(num.s_neg_knee, ana.s_neg_knee),
        rel(num.s_minus_pi, ana.s_minus_pi),
    ]
    .into_iter()
    .fold(0.0, f64::max);

    let s0 = p.from_reduced(set.initial, set.omega);
    let traj = integrate(p, set.omega, s0, &opts)?;
    let v0 = lyapunov_value(s0, p, set.omega);
    let rise = lyapunov_audit(&traj, p, set.omega);

    Ok(vec![
        check("lock_in", exact.omega_l, wl, rel(wl, exact.omega_l), ORACLE_REL_TOL),
        check("conservative_lock_in", exact.omega_l_c, wc, rel(wc, exact.omega_l_c), ORACLE_REL_TOL),
        check("separatrix_landmarks", ana.s_zero, num.s_zero, sep_err, SEPARATRIX_REL_TOL),
        check("lyapunov_increase", 0.0, rise, rise / v0, LYAPUNOV_REL_TOL),
    ])
}

/// Oracle-equivalence batch over `sets` seeded random parameter sets.
pub fn verify_checks(cfg: &VerifyConfig, seed: u64) -> CliResult<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sets: Vec<VerifySet> = (0..cfg.sets)
        .map(|i| {
            let params = random_params(&mut rng, CASES[i % CASES.len()]);
            let omega = rng.gen_range(-4.0..4.0) * params.omega_scale();
            let initial = ReducedState::new(rng.gen_range(-4.0..4.0), rng.gen_range(-PI..PI));
            VerifySet { params, omega, initial }
        })
        .collect();
    let checks = sets
        .par_iter()
        .enumerate()
        .map(|(i, s)| verify_one(i, s, cfg.bisect_rel_tol))
        .collect::<Result<Vec<_>, LockInError>>()?;
    Ok(checks.into_iter().flatten().collect())
}

pub fn checks_table(checks: &[Check]) -> Table {
    let mut table = Table::new(vec![
        "set", "check", "case", "a", "k", "expected", "observed", "error", "tolerance", "pass",
    ]);
    for c in checks {
        table.push(vec![
            c.set.into(),
            c.name.into(),
            c.case.to_string().into(),
            c.a.into(),
            c.k.into(),
            c.expected.into(),
            c.observed.into(),
            c.error.into(),
            c.tolerance.into(),
            c.passed().into(),
        ]);
    }
    table
}

/// Executes a resolved configuration, writing its table to the chosen sink.
pub fn run(cfg: &RunConfig) -> CliResult<()> {
    let out = cfg.out.as_deref();
    match &cfg.command {
        CommandConfig::Analyze { params, omega } => analyze(params, *omega)?.emit(cfg.format, out),
        CommandConfig::Simulate(s) => {
            let (table, summary) = simulate(s)?;
            table.emit(cfg.format, out)?;
            eprintln!("{summary}");
            Ok(())
        }
        CommandConfig::Portrait(p) => portrait(p)?.emit(cfg.format, out),
        CommandConfig::Sweep(s) => sweep(s)?.emit(cfg.format, out),
        CommandConfig::Verify(v) => {
            let checks = verify_checks(v, cfg.seed)?;
            checks_table(&checks).emit(cfg.format, out)?;
            let failed = checks.iter().filter(|c| !c.passed()).count();
            if failed > 0 {
                return Err(CliError::Numeric(format!("{failed} of {} checks failed", checks.len())));
            }
            eprintln!("all {} checks passed", checks.len());
            Ok(())
        }
    }
}
