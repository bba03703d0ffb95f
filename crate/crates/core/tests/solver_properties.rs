use std::sync::Arc;

use blowup_lab::error::{Error, HypothesisError};
use blowup_lab::grid::{integrate, Field, Grid};
use blowup_lab::lift::{erf, LiftParams};
use blowup_lab::solver::{init_state, lifted_field, run, sign_audits, step, LayerState, ScenarioConfig, Stepper, TimeFn};
use blowup_lab::weight::build_weight;

fn base(grid: &Arc<Grid>) -> ScenarioConfig {
    ScenarioConfig {
        p_bar: TimeFn::Zero,
        u_bar_e: TimeFn::Zero,
        s_wall: TimeFn::Zero,
        s_far: TimeFn::Zero,
        w0: Field::zeros(grid.clone()),
        s0: Field::zeros(grid.clone()),
        horizon: 1.0,
        grid: grid.clone(),
        dt_init: 1e-2,
        dt_min: 1e-12,
        blowup_cap: 1e6,
        snapshot_stride: 0,
    }
}

#[test]
fn zero_state_is_a_fixed_point() {
    let grid = Arc::new(Grid::new(10.0, 200).unwrap());
    let cfg = base(&grid);
    let mut state = init_state(&cfg, &LiftParams::zero()).unwrap();
    for _ in 0..100 {
        state = step(&state, &cfg, 1e-2).unwrap();
        assert!(state.w.values().iter().chain(state.s.values()).all(|&x| x == 0.0));
    }
    let trace = run(&cfg, &LiftParams::zero(), &build_weight(2.0, 16.0).unwrap()).unwrap();
    assert!(trace.rows.iter().all(|r| r.w_inf <= 1e-12));
}

#[test]
fn transport_velocity_carries_the_mass_of_w() {
    let grid = Arc::new(Grid::new(20.0, 400).unwrap());
    let mut cfg = base(&grid);
    cfg.u_bar_e = TimeFn::Constant(0.3);
    cfg.s_wall = TimeFn::Constant(-0.2);
    cfg.s_far = TimeFn::Constant(-0.2);
    cfg.w0 = Field::from_fn(grid.clone(), |y| 0.3 * erf(0.5 * y) + 2.0 * y * (-y).exp());
    cfg.s0 = Field::from_fn(grid.clone(), |_| -0.2);
    let p = cfg.lift_params();
    let mut state = init_state(&cfg, &p).unwrap();
    let mut stepper = Stepper::new(grid.clone());
    for _ in 0..200 {
        state = stepper.advance(&state, &cfg, 2e-3, 1e6).unwrap();
        assert_eq!(*state.v.values().last().unwrap(), integrate(&state.w).unwrap());
        assert_eq!(state.w.values()[0], 0.0);
        assert_eq!(*state.w.values().last().unwrap(), 0.3);
        assert_eq!(state.s.values()[0], -0.2);
    }
}

/// Small-amplitude erf data: the nonlinear terms are `O(ε²)` and the scheme
/// reduces to implicit heat flow, whose exact solution is `ε erf(y / 2√(1+t))`.
#[test]
fn small_data_follows_heat_flow() {
    let eps = 1e-6;
    let errors: Vec<f64> = [(200usize, 4e-3), (400, 1e-3)]
        .iter()
        .map(|&(n, dt)| {
            let grid = Arc::new(Grid::new(20.0, n).unwrap());
            let mut cfg = base(&grid);
            cfg.u_bar_e = TimeFn::Constant(eps);
            cfg.w0 = Field::from_fn(grid.clone(), |y| eps * erf(0.5 * y));
            let mut state = init_state(&cfg, &cfg.lift_params()).unwrap();
            let mut stepper = Stepper::new(grid.clone());
            let t_end = 0.2;
            while state.t < t_end - 1e-12 {
                state = stepper.advance(&state, &cfg, dt, 1e6).unwrap();
            }
            let scale = 2.0 * (1.0 + state.t).sqrt();
            grid.nodes()
                .iter()
                .zip(state.w.values())
                .map(|(&y, &w)| (w / eps - erf(y / scale)).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    assert!(errors[0] < 2e-3, "{errors:?}");
    // dt/4 and h/2: both error sources shrink by about four
    assert!(errors[1] < errors[0] / 3.0, "{errors:?}");
}

#[test]
fn initial_data_hypotheses() {
    let grid = Arc::new(Grid::new(10.0, 100).unwrap());
    let mut cfg = base(&grid);
    cfg.u_bar_e = TimeFn::Constant(-0.5);
    cfg.w0 = Field::from_fn(grid.clone(), |y| -0.5 * erf(0.5 * y));
    let p = LiftParams::new(0.5, 0.0).unwrap();
    assert!(matches!(init_state(&cfg, &p), Err(Error::Hypothesis(HypothesisError::LiftedDataNotPositive { .. }))));

    cfg.w0 = Field::zeros(grid.clone());
    cfg.u_bar_e = TimeFn::Linear(0.0, -0.25);
    let p = cfg.lift_params();
    assert_eq!(p.c_e(), 0.25);
    let state = init_state(&cfg, &p).unwrap();
    let a = lifted_field(&state, &p).unwrap();
    for (&y, &v) in grid.nodes().iter().zip(a.values()) {
        assert!((v - 0.25 * erf(0.5 * y)).abs() < 1e-15);
    }

    let mut s0 = vec![0.0; grid.len()];
    s0[40] = 1e-3;
    cfg.s0 = Field::new(grid.clone(), s0).unwrap();
    assert!(matches!(init_state(&cfg, &p), Err(Error::Hypothesis(HypothesisError::InitialSourcePositive { .. }))));
}

#[test]
fn lifted_field_tends_to_the_far_field_limit() {
    let grid = Arc::new(Grid::new(30.0, 600).unwrap());
    let mut cfg = base(&grid);
    cfg.p_bar = TimeFn::Constant(0.2);
    cfg.u_bar_e = TimeFn::Linear(-0.1, -0.1);
    cfg.w0 = Field::from_fn(grid.clone(), |y| -0.1 * erf(0.5 * y) + y * (-y).exp());
    let p = cfg.lift_params();
    let trace_state = {
        let mut s = init_state(&cfg, &p).unwrap();
        let mut stepper = Stepper::new(grid.clone());
        for _ in 0..500 {
            s = stepper.advance(&s, &cfg, 1e-3, 1e6).unwrap();
        }
        s
    };
    let t = trace_state.t;
    let a = lifted_field(&trace_state, &p).unwrap();
    let limit = p.c_p() * t + p.c_e() + cfg.u_bar_e.eval(t);
    assert!((a.values().last().unwrap() - limit).abs() < 1e-9, "{} vs {limit}", a.values().last().unwrap());
}

#[test]
fn runs_are_bitwise_deterministic() {
    let grid = Arc::new(Grid::new(20.0, 400).unwrap());
    let mut cfg = base(&grid);
    cfg.u_bar_e = TimeFn::Constant(0.05);
    cfg.w0 = Field::from_fn(grid.clone(), |y| 0.5 * y * (-y).exp() + 0.05 * erf(0.5 * y));
    let p = cfg.lift_params();
    let w = build_weight(2.0, 16.0).unwrap();
    let a = run(&cfg, &p, &w).unwrap();
    let b = run(&cfg, &p, &w).unwrap();
    assert_eq!(a, b);
}

#[test]
fn sign_audit_locates_an_injected_violation() {
    let grid = Arc::new(Grid::new(20.0, 200).unwrap());
    let mut cfg = base(&grid);
    cfg.u_bar_e = TimeFn::Constant(0.05);
    cfg.w0 = Field::from_fn(grid.clone(), |y| 0.05 * erf(0.5 * y));
    let p = cfg.lift_params();
    let mut trace = run(&cfg, &p, &build_weight(2.0, 16.0).unwrap()).unwrap();
    let (s_ok, a_ok) = sign_audits(&trace.rows, &p);
    assert!(s_ok.passed && a_ok.passed);
    trace.rows[7].s_max = 1e-3;
    let (s_bad, _) = sign_audits(&trace.rows, &p);
    assert!(!s_bad.passed);
    assert_eq!(s_bad.first_violation.unwrap().t, trace.rows[7].t);
}

#[test]
fn diverged_states_are_rejected() {
    let grid = Arc::new(Grid::new(10.0, 100).unwrap());
    let mut state = LayerState::from_values(grid.clone(), 0.0, vec![0.0; 101], vec![0.0; 101]).unwrap();
    state.diverged = true;
    assert!(matches!(step(&state, &base(&grid), 1e-3), Err(Error::Diverged)));
}
