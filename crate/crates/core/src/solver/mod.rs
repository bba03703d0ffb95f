//! Time integration of the wall-restricted `(w̃, s̃)` system
//!
//! ```text
//! ∂_t w = ∂_y² w + w² − v ∂_y w − P̄(t) − s,
//! ∂_t s = ∂_y² s + w s − v ∂_y s,          v = ∫₀^y w,
//! w(0) = 0,  s(0) = s_wall(t),  w(y_max) = Ū^E(t),  s(y_max) = s_far(t).
//! ```
//!
//! One step is IMEX Euler: backward Euler for diffusion (one tridiagonal
//! solve per unknown), everything else explicit at the old time level.
//! Transport uses upwinded MUSCL differences with minmod-limited slopes, so
//! a step under the CFL cap cannot create new extrema.

mod axis;
mod mms;
mod trace;

pub use axis::{axis_restriction_run, energy_audit, energy_growth_rate, AxisCoefficients, AxisTrace};
pub use mms::{mms_error, observed_orders, ManufacturedSolution, MmsError};
pub use trace::{read_trace_csv, write_trace_csv, Outcome, Snapshot, Trace, TraceRow, TRACE_HEADER};

use std::sync::Arc;

use crate::audit::AuditReport;
use crate::error::{Error, HypothesisError, Result};
use crate::grid::{cumtrapz, sup_norm, trapz, Field, Grid};
use crate::lift::{phi_on_grid, LiftParams};
use crate::lyapunov::WeightOnGrid;
use crate::tridiag::DirichletDiffusion;
use crate::weight::WeightSpec;

/// Largest accepted relative change of `w` or `s` over one step.
pub const MAX_RELATIVE_CHANGE: f64 = 0.1;
/// Consecutive accepted steps before the step size is doubled.
pub const GROWTH_AFTER: usize = 10;
/// Transport CFL number bound: `dt·max|v| ≤ CFL·h`.
pub const CFL: f64 = 0.5;
/// Bound on `dt·max(0, −w)`, which keeps the explicit factor `1 + dt·w` of
/// the `s` reaction positive.
pub const REACTION_LIMIT: f64 = 0.5;

/// A scalar function of time from one of the closed-form families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeFn {
    Zero,
    Constant(f64),
    /// `a + b t`.
    Linear(f64, f64),
}

impl TimeFn {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            TimeFn::Zero => 0.0,
            TimeFn::Constant(c) => c,
            TimeFn::Linear(a, b) => a + b * t,
        }
    }

    /// Extremes over `[0, horizon]`; every family is monotone.
    pub fn min_on(&self, horizon: f64) -> f64 {
        self.eval(0.0).min(self.eval(horizon))
    }

    pub fn max_on(&self, horizon: f64) -> f64 {
        self.eval(0.0).max(self.eval(horizon))
    }
}

/// Boundary data, forcing and optional manufactured sources of the system.
pub trait Forcing {
    fn p_bar(&self, t: f64) -> f64;
    fn u_bar_e(&self, t: f64) -> f64;
    fn s_wall(&self, t: f64) -> f64;
    fn s_far(&self, t: f64) -> f64;

    /// Extra `(w, s)` source terms at `(t, y)`.
    fn source(&self, _t: f64, _y: f64) -> (f64, f64) {
        (0.0, 0.0)
    }

    fn has_source(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub p_bar: TimeFn,
    pub u_bar_e: TimeFn,
    pub s_wall: TimeFn,
    pub s_far: TimeFn,
    pub w0: Field,
    pub s0: Field,
    pub horizon: f64,
    pub grid: Arc<Grid>,
    pub dt_init: f64,
    pub dt_min: f64,
    pub blowup_cap: f64,
    /// Store a full snapshot every this many accepted steps (0 disables).
    pub snapshot_stride: usize,
}

impl Forcing for ScenarioConfig {
    fn p_bar(&self, t: f64) -> f64 {
        self.p_bar.eval(t)
    }
    fn u_bar_e(&self, t: f64) -> f64 {
        self.u_bar_e.eval(t)
    }
    fn s_wall(&self, t: f64) -> f64 {
        self.s_wall.eval(t)
    }
    fn s_far(&self, t: f64) -> f64 {
        self.s_far.eval(t)
    }
}

impl ScenarioConfig {
    /// `C_E = −inf min(Ū^E, 0)` and `C_P = sup max(P̄, 0)` over `[0, T]`.
    pub fn lift_params(&self) -> LiftParams {
        let c_e = (-self.u_bar_e.min_on(self.horizon)).max(0.0);
        let c_p = self.p_bar.max_on(self.horizon).max(0.0);
        LiftParams::new(c_e, c_p).expect("nonnegative finite by construction")
    }

    /// All data identically zero. The zero state is then an exact solution
    /// and strict positivity of the lifted data is not required.
    pub fn is_trivial(&self) -> bool {
        [self.p_bar, self.u_bar_e, self.s_wall, self.s_far].iter().all(|f| *f == TimeFn::Zero || *f == TimeFn::Constant(0.0) || *f == TimeFn::Linear(0.0, 0.0))
            && self.w0.values().iter().chain(self.s0.values()).all(|&x| x == 0.0)
    }

    /// Sign conditions on the boundary sources and the initial data.
    pub fn check_admissible(&self, p: &LiftParams) -> Result<()> {
        let big_t = self.horizon;
        if !(big_t.is_finite() && big_t > 0.0) {
            return Err(Error::Domain(format!("horizon must be positive, got {big_t}")));
        }
        if !(self.dt_init > 0.0 && self.dt_min > 0.0 && self.dt_min <= self.dt_init) {
            return Err(Error::Domain("need 0 < dt_min <= dt_init".into()));
        }
        if !(self.blowup_cap > 0.0) {
            return Err(Error::Domain("blowup_cap must be positive".into()));
        }
        for t in [0.0, big_t] {
            let value = self.s_wall.eval(t);
            if value > 0.0 {
                return Err(HypothesisError::WallSourcePositive { t, value }.into());
            }
            let value = self.s_far.eval(t);
            if value > 0.0 {
                return Err(HypothesisError::FarSourcePositive { t, value }.into());
            }
        }
        let y = self.grid.nodes();
        let (w0, s0) = (self.w0.values(), self.s0.values());
        if w0.len() != y.len() || s0.len() != y.len() {
            return Err(Error::LengthMismatch {
                expected: y.len(),
                got: w0.len().min(s0.len()),
            });
        }
        if !(self.w0.is_finite() && self.s0.is_finite()) {
            return Err(Error::Diverged);
        }
        if let Some(k) = (0..y.len()).find(|&k| s0[k] > 0.0) {
            return Err(HypothesisError::InitialSourcePositive { y: y[k], value: s0[k] }.into());
        }
        let w_scale = 1e-12 * (1.0 + sup_norm(w0));
        if w0[0].abs() > w_scale {
            return Err(HypothesisError::WallVelocityIncompatible { value: w0[0] }.into());
        }
        let wall = self.s_wall.eval(0.0);
        if (s0[0] - wall).abs() > 1e-12 * (1.0 + sup_norm(s0)) {
            return Err(HypothesisError::WallSourceIncompatible { s0: s0[0], wall }.into());
        }
        if self.is_trivial() {
            return Ok(());
        }
        let phi0 = phi_on_grid(0.0, &self.grid, p);
        for k in 1..y.len() - 1 {
            let a0 = w0[k] + phi0[k];
            if !(a0 > 0.0) {
                return Err(HypothesisError::LiftedDataNotPositive { y: y[k], value: a0 }.into());
            }
        }
        Ok(())
    }
}

/// State of the integration at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerState {
    pub t: f64,
    pub w: Field,
    pub s: Field,
    /// `∂_y⁻¹ w` by cumulative trapezoid quadrature.
    pub v: Field,
    pub diverged: bool,
}

impl LayerState {
    /// Builds a state from nodal values, computing `v`.
    pub fn from_values(grid: Arc<Grid>, t: f64, w: Vec<f64>, s: Vec<f64>) -> Result<Self> {
        let mut v = vec![0.0; w.len()];
        cumtrapz(grid.h(), &w, &mut v);
        Ok(Self {
            t,
            w: Field::new(grid.clone(), w)?,
            s: Field::new(grid.clone(), s)?,
            v: Field::new(grid, v)?,
            diverged: false,
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.w.grid()
    }
}

/// Validates the scenario and returns the state at `t = 0`. The far-field
/// rows are set from the boundary data at `t = 0`.
pub fn init_state(cfg: &ScenarioConfig, p: &LiftParams) -> Result<LayerState> {
    cfg.check_admissible(p)?;
    let mut w = cfg.w0.values().to_vec();
    let mut s = cfg.s0.values().to_vec();
    let last = w.len() - 1;
    w[0] = 0.0;
    w[last] = cfg.u_bar_e.eval(0.0);
    s[0] = cfg.s_wall.eval(0.0);
    s[last] = cfg.s_far.eval(0.0);
    LayerState::from_values(cfg.grid.clone(), 0.0, w, s)
}

/// Upwind `∂_y f` at interior node `k` for transport speed `v`, from
/// minmod-limited face values. Second order away from extrema.
#[inline]
fn upwind(f: &[f64], k: usize, v: f64, inv_h: f64) -> f64 {
    let last = f.len() - 1;
    if v >= 0.0 {
        let right = f[k] + 0.5 * limited_slope(f, k);
        let left = if k >= 2 { f[k - 1] + 0.5 * limited_slope(f, k - 1) } else { f[k - 1] };
        inv_h * (right - left)
    } else {
        let left = f[k] - 0.5 * limited_slope(f, k);
        let right = if k + 1 < last { f[k + 1] - 0.5 * limited_slope(f, k + 1) } else { f[k + 1] };
        inv_h * (right - left)
    }
}

/// Minmod slope at an interior node, zero at the ends.
fn limited_slope(f: &[f64], k: usize) -> f64 {
    if k == 0 || k + 1 >= f.len() {
        return 0.0;
    }
    let (a, b) = (f[k] - f[k - 1], f[k + 1] - f[k]);
    if a * b <= 0.0 {
        0.0
    } else if a.abs() < b.abs() {
        a
    } else {
        b
    }
}

/// Reusable workspace for IMEX steps on a fixed grid.
#[derive(Debug, Clone)]
pub struct Stepper {
    grid: Arc<Grid>,
    matrix: DirichletDiffusion,
    matrix_dt: f64,
}

impl Stepper {
    pub fn new(grid: Arc<Grid>) -> Self {
        let n = grid.len();
        Self {
            matrix: DirichletDiffusion::new(n, 0.0),
            matrix_dt: 0.0,
            grid,
        }
    }

    /// One IMEX Euler step of size `dt`. The returned state is flagged
    /// diverged when any value is non-finite or `‖w‖_∞ ≥ cap`.
    pub fn advance(&mut self, state: &LayerState, forcing: &impl Forcing, dt: f64, cap: f64) -> Result<LayerState> {
        if state.diverged {
            return Err(Error::Diverged);
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::Domain(format!("dt must be positive, got {dt}")));
        }
        if !Arc::ptr_eq(state.grid(), &self.grid) && **state.grid() != *self.grid {
            return Err(Error::InvalidGrid("state lives on a different grid".into()));
        }
        let h = self.grid.h();
        let inv_h = 1.0 / h;
        let nodes = self.grid.nodes();
        let (w, s, v) = (state.w.values(), state.s.values(), state.v.values());
        let n = w.len();
        let last = n - 1;
        let t = state.t;
        let p_bar = forcing.p_bar(t);
        let with_source = forcing.has_source();

        let mut new_w = vec![0.0; n];
        let mut new_s = vec![0.0; n];
        for k in 1..last {
            let dw = upwind(w, k, v[k], inv_h);
            let ds = upwind(s, k, v[k], inv_h);
            let (src_w, src_s) = if with_source {
                forcing.source(t, nodes[k])
            } else {
                (0.0, 0.0)
            };
            new_w[k] = w[k] + dt * (w[k] * w[k] - v[k] * dw - p_bar - s[k] + src_w);
            new_s[k] = s[k] + dt * (w[k] * s[k] - v[k] * ds + src_s);
        }
        let t_new = t + dt;
        new_w[0] = 0.0;
        new_w[last] = forcing.u_bar_e(t_new);
        new_s[0] = forcing.s_wall(t_new);
        new_s[last] = forcing.s_far(t_new);

        if self.matrix_dt != dt {
            self.matrix = DirichletDiffusion::new(n, dt / (h * h));
            self.matrix_dt = dt;
        }
        self.matrix.solve(&mut new_w);
        self.matrix.solve(&mut new_s);

        let mut next = LayerState::from_values(self.grid.clone(), t_new, new_w, new_s)?;
        let finite = next.w.is_finite() && next.s.is_finite() && next.v.is_finite();
        if !finite || next.w.sup_norm() >= cap {
            next.diverged = true;
            next.w.mark_diverged();
            next.s.mark_diverged();
            next.v.mark_diverged();
        }
        Ok(next)
    }
}

/// One IMEX step of the scenario system.
pub fn step(state: &LayerState, cfg: &ScenarioConfig, dt: f64) -> Result<LayerState> {
    Stepper::new(cfg.grid.clone()).advance(state, cfg, dt, cfg.blowup_cap)
}

/// `a = w̃ + φ(t, ·)` nodewise.
pub fn lifted_field(state: &LayerState, p: &LiftParams) -> Result<Field> {
    if state.diverged {
        return Err(Error::Diverged);
    }
    let phi = phi_on_grid(state.t, state.grid(), p);
    let a = state.w.values().iter().zip(&phi).map(|(w, f)| w + f).collect();
    Field::new(state.grid().clone(), a)
}

fn relative_change(old: &[f64], new: &[f64]) -> f64 {
    let scale = sup_norm(old).max(1.0);
    old.iter()
        .zip(new)
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
        / scale
}

/// Trace row of a state; `a_min` is over interior nodes only.
fn row_of(state: &LayerState, dt: f64, p: &LiftParams, weight: &WeightOnGrid) -> TraceRow {
    let h = state.grid().h();
    let (w, s) = (state.w.values(), state.s.values());
    let phi = phi_on_grid(state.t, state.grid(), p);
    let a: Vec<f64> = w.iter().zip(&phi).map(|(w, f)| w + f).collect();
    let a_min = a[1..a.len() - 1].iter().copied().fold(f64::INFINITY, f64::min);
    let s_max = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w2: Vec<f64> = w.iter().map(|x| x * x).collect();
    let s2: Vec<f64> = s.iter().map(|x| x * x).collect();
    TraceRow {
        t: state.t,
        dt,
        w_inf: sup_norm(w),
        s_max,
        a_min,
        energy: trapz(h, &w2) + trapz(h, &s2),
        g: weight.functional_values(&a),
    }
}

/// Adaptive integration up to `cfg.horizon`.
///
/// Steps with relative change above [`MAX_RELATIVE_CHANGE`] or non-finite
/// values are retried with half the step; the step doubles (up to
/// `dt_init`) after [`GROWTH_AFTER`] consecutive accepts. Each trial step is
/// also capped by the transport CFL bound and the reaction bound. A step
/// reaching `‖w‖_∞ ≥ blowup_cap` is recorded and ends the run as a blowup;
/// a required step below `dt_min` ends it as an underflow.
pub fn run(cfg: &ScenarioConfig, p: &LiftParams, weight: &WeightSpec) -> Result<Trace> {
    run_with(cfg, cfg, p, weight)
}

/// [`run`] with the boundary data and sources taken from `forcing`.
pub fn run_with(cfg: &ScenarioConfig, forcing: &impl Forcing, p: &LiftParams, weight: &WeightSpec) -> Result<Trace> {
    let mut state = init_state(cfg, p)?;
    let weight_grid = WeightOnGrid::new(weight, &cfg.grid)?;
    let mut stepper = Stepper::new(cfg.grid.clone());
    let h = cfg.grid.h();
    let big_t = cfg.horizon;

    let mut rows = vec![row_of(&state, 0.0, p, &weight_grid)];
    let mut snapshots = Vec::new();
    if cfg.snapshot_stride > 0 {
        snapshots.push(Snapshot::of(&state));
    }
    let mut dt = cfg.dt_init;
    let mut accepted_run = 0usize;
    let mut accepted_total = 0usize;

    let outcome = loop {
        if state.t >= big_t * (1.0 - 1e-14) {
            break Outcome::Completed;
        }
        let v_max = sup_norm(state.v.values());
        let w_neg = state.w.values().iter().fold(0.0_f64, |m, &x| m.max(-x));
        let remaining = big_t - state.t;
        let mut trial = if remaining - dt < cfg.dt_min { remaining } else { dt };
        if v_max > 0.0 {
            trial = trial.min(CFL * h / v_max);
        }
        if w_neg > 0.0 {
            trial = trial.min(REACTION_LIMIT / w_neg);
        }
        if trial < cfg.dt_min {
            break Outcome::StepUnderflow(state.t);
        }
        let next = stepper.advance(&state, forcing, trial, cfg.blowup_cap)?;
        let finite = [next.w.values(), next.s.values(), next.v.values()]
            .iter()
            .all(|f| f.iter().all(|x| x.is_finite()));
        if !finite {
            dt = trial * 0.5;
            accepted_run = 0;
            continue;
        }
        let change = relative_change(state.w.values(), next.w.values())
            .max(relative_change(state.s.values(), next.s.values()));
        if next.diverged {
            rows.push(row_of(&next, trial, p, &weight_grid));
            break Outcome::BlowupDetected(next.t);
        }
        if change > MAX_RELATIVE_CHANGE {
            dt = trial * 0.5;
            accepted_run = 0;
            continue;
        }
        state = next;
        accepted_total += 1;
        accepted_run += 1;
        rows.push(row_of(&state, trial, p, &weight_grid));
        if cfg.snapshot_stride > 0 && accepted_total % cfg.snapshot_stride == 0 {
            snapshots.push(Snapshot::of(&state));
        }
        if accepted_run >= GROWTH_AFTER {
            dt = (dt * 2.0).min(cfg.dt_init);
            accepted_run = 0;
        }
    };
    Ok(Trace {
        rows,
        snapshots,
        outcome,
    })
}

/// Discrete maximum-principle audits over recorded rows: `max s̃ ≤ tol` and
/// `min a ≥ −tol` (interior nodes) with `tol = 1e−8 (1 + ‖w̃‖_∞ + C_E + C_P t)`.
/// The scale bounds `‖a‖_∞` using `0 ≤ φ ≤ C_E + C_P t` and needs only the
/// columns of the trace CSV.
pub fn sign_audits(rows: &[TraceRow], p: &LiftParams) -> (AuditReport, AuditReport) {
    let mut s_report = AuditReport::new("s_nonpositive");
    let mut a_report = AuditReport::new("a_nonnegative");
    for r in rows {
        let tol = 1e-8 * (1.0 + r.w_inf + p.far_field(r.t));
        s_report.check(r.t, None, r.s_max, 0.0, -r.s_max, tol);
        a_report.check(r.t, None, r.a_min, 0.0, r.a_min, tol);
    }
    (s_report, a_report)
}
