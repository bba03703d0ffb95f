//! Audits of the comparison law along numerical trajectories.

use std::io::Write;
use std::sync::Arc;

use super::{lower_bound, Bound, LyapunovConstants, WeightOnGrid};
use crate::audit::AuditReport;
use crate::error::{Error, Result};
use crate::grid::{cumtrapz, diff1, interpolate, sup_norm, trapz, trapz_between, Grid};
use crate::lift::{phi_dy_on_grid, phi_on_grid, LiftParams};
use crate::solver::{LayerState, Outcome, Snapshot, TimeFn, TraceRow};
use crate::weight::WeightSpec;

pub const DEFAULT_C_AUDIT: f64 = 10.0;
/// Rows this close to a detected blowup are left out of the verdicts.
pub const EXCLUDED_TAIL_STEPS: usize = 5;
pub const AUDIT_HEADER: &str = "t,G,dGdt,rhs,slack,R1,R2,R3,R4,R5,R6,pass";

/// The six terms `ℛ₁…ℛ₆` at one state together with their lower bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TermBounds {
    pub t: f64,
    pub g: f64,
    pub r: [f64; 6],
    pub bounds: [f64; 6],
    pub ok: [bool; 6],
    /// `κ𝒢² − damping·𝒢`.
    pub chain_rhs: f64,
    /// `Σℛᵢ ≥ chain_rhs − tol`.
    pub chain_ok: bool,
    pub tol: f64,
}

struct Pieces {
    g: f64,
    r: [f64; 6],
    /// `∂_y⁻¹a(α)`.
    v_alpha: f64,
    int_alpha_gamma: f64,
    int_alpha_delta: f64,
    /// `∫_δ^∞ (∂_y⁻¹a)² 𝒴″`.
    vv_far: f64,
    /// `∫_δ^∞ a² 𝒴`.
    aa_far: f64,
    aa_near: f64,
    aa_mid: f64,
}

fn pieces(state: &LayerState, p: &LiftParams, w: &WeightSpec, wg: &WeightOnGrid) -> Result<Pieces> {
    if state.diverged || !state.w.is_finite() {
        return Err(Error::Diverged);
    }
    let grid: &Grid = state.grid();
    let h = grid.h();
    let n = grid.len();
    let last = n - 1;
    let y_max = grid.y_max();
    let t = state.t;

    let phi = phi_on_grid(t, grid, p);
    let phi_y = phi_dy_on_grid(t, grid, p);
    let a: Vec<f64> = state.w.values().iter().zip(&phi).map(|(w, f)| w + f).collect();
    let mut v = vec![0.0; n];
    cumtrapz(h, &a, &mut v);
    let mut big_phi = vec![0.0; n];
    cumtrapz(h, &phi, &mut big_phi);
    let mut a_y = vec![0.0; n];
    diff1(h, &a, &mut a_y);

    let (a_n, v_n, phi_n) = (a[last], v[last], phi[last]);
    let (t0, y_tail, dy_tail) = (wg.tail_mass, wg.tail_value, wg.tail_slope);
    let prod = |f: &dyn Fn(usize) -> f64| -> Vec<f64> { (0..n).map(f).collect() };

    let g = wg.functional_values(&a);
    let r1 = trapz(h, &prod(&|k| a[k] * wg.d2[k])) - a_n * dy_tail;
    let vv_y2 = prod(&|k| v[k] * v[k] * wg.d2[k]);
    let vv_tail = -v_n * v_n * dy_tail + 2.0 * a_n * v_n * y_tail + 2.0 * a_n * a_n * t0;
    let r2 = 0.5 * (trapz_between(grid, &vv_y2, w.beta, y_max) + vv_tail);
    let aa_y = prod(&|k| a[k] * a[k] * wg.values[k]);
    let aa_tail = a_n * a_n * t0;
    let r3 = 2.0 * (trapz(h, &aa_y) + aa_tail);
    let va_y1 = prod(&|k| v[k] * a[k] * wg.d1[k]);
    let r4 = trapz_between(grid, &va_y1, 0.0, w.beta);
    let r5 = 2.0 * (trapz_between(grid, &va_y1, w.beta, y_max) + a_n * (-v_n * y_tail - a_n * t0));
    let l_y = prod(&|k| (-2.0 * a[k] * phi[k] + big_phi[k] * a_y[k] + v[k] * phi_y[k]) * wg.values[k]);
    let r6 = trapz(h, &l_y) - 2.0 * a_n * phi_n * t0;

    let v_at = |y: f64| interpolate(grid, &v, y);
    let v_alpha = v_at(w.alpha);
    Ok(Pieces {
        g,
        r: [r1, r2, r3, r4, r5, r6],
        v_alpha,
        int_alpha_gamma: v_at(w.gamma) - v_alpha,
        int_alpha_delta: v_at(w.delta) - v_alpha,
        vv_far: trapz_between(grid, &vv_y2, w.delta, y_max) + vv_tail,
        aa_far: trapz_between(grid, &aa_y, w.delta, y_max) + aa_tail,
        aa_near: trapz_between(grid, &aa_y, 0.0, w.alpha),
        aa_mid: trapz_between(grid, &aa_y, w.alpha, w.delta),
    })
}

/// `ℛ₁…ℛ₆` of the lifted field `a = w̃ + φ` by trapezoid quadrature; the
/// half-line beyond `y_max` is included with `a ≡ a(y_max)`.
pub fn decompose_rhs(state: &LayerState, p: &LiftParams, w: &WeightSpec) -> Result<[f64; 6]> {
    let wg = WeightOnGrid::new(w, state.grid())?;
    Ok(pieces(state, p, w, &wg)?.r)
}

/// Evaluates each term against its lower bound and the sum against the
/// comparison law, with quadrature tolerance `c_audit h² (1 + 𝒢²)`.
pub fn term_bounds(
    state: &LayerState,
    w: &WeightSpec,
    wg: &WeightOnGrid,
    k: &LyapunovConstants,
    c_audit: f64,
) -> Result<TermBounds> {
    let p = k.lift();
    let pc = pieces(state, &p, w, wg)?;
    let t = state.t;
    let g = pc.g;
    let h = state.grid().h();
    let tol = c_audit * h * h * (1.0 + g * g);
    let dy_delta = w.eval(w.delta).1;
    let dy_gamma = w.eval(w.gamma).1;
    let dy_zero = w.eval(0.0).1;
    let inf_y = w.inf_on_alpha_delta();
    let va2 = pc.v_alpha * pc.v_alpha;
    let iad2 = pc.int_alpha_delta * pc.int_alpha_delta;
    let bounds = [
        -k.lambda * g,
        dy_delta * va2 + dy_delta * pc.int_alpha_gamma * pc.int_alpha_gamma + 0.5 * pc.vv_far,
        2.0 * (pc.aa_near + pc.aa_far) + pc.aa_mid + inf_y / (w.delta - w.alpha) * iad2,
        0.5 * dy_zero * va2,
        2.0 * dy_gamma * (va2 + iad2) - 0.5 * k.eta * w.sigma * pc.vv_far - 2.0 / k.eta * pc.aa_far,
        -(3.0 + k.mu) * (k.c_e + k.c_p * t) * g,
    ];
    let mut ok = [false; 6];
    for i in 0..6 {
        ok[i] = pc.r[i] >= bounds[i] - tol;
    }
    let sum: f64 = pc.r.iter().sum();
    let chain_rhs = k.comparison_rhs(t, g);
    Ok(TermBounds {
        t,
        g,
        r: pc.r,
        bounds,
        ok,
        chain_rhs,
        chain_ok: sum >= chain_rhs - tol,
        tol,
    })
}

/// `forcing_g = φ² − ∂_y⁻¹φ ∂_yφ + C_P − P̄ − s̃ ≥ φ²/2` at each snapshot,
/// with tolerance `c_audit h² (1 + ‖φ‖²_∞)`.
pub fn forcing_audit(snapshots: &[Snapshot], grid: &Arc<Grid>, p: &LiftParams, p_bar: &TimeFn, c_audit: f64) -> AuditReport {
    let mut report = AuditReport::new("forcing_lower_bound");
    let h = grid.h();
    let y = grid.nodes();
    let n = grid.len();
    for snap in snapshots {
        let t = snap.t;
        let phi = phi_on_grid(t, grid, p);
        let phi_y = phi_dy_on_grid(t, grid, p);
        let mut big_phi = vec![0.0; n];
        cumtrapz(h, &phi, &mut big_phi);
        let scale = sup_norm(&phi);
        let tol = c_audit * h * h * (1.0 + scale * scale);
        let pb = p_bar.eval(t);
        for k in 0..n {
            let g = phi[k] * phi[k] - big_phi[k] * phi_y[k] + p.c_p() - pb - snap.s[k];
            let limit = 0.5 * phi[k] * phi[k];
            report.check(t, Some(y[k]), g, limit, g - limit, tol);
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq)]
pub struct InequalityRecord {
    pub t: f64,
    pub g: f64,
    pub dg_dt: f64,
    pub rhs: f64,
    pub slack: f64,
    pub tol: f64,
    pub excluded: bool,
    pub pass: bool,
    pub terms: Option<TermBounds>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InequalityAudit {
    pub records: Vec<InequalityRecord>,
    /// Verdict on the measured slope against the comparison law.
    pub overall: bool,
    /// Times left out because they sit within the last steps before blowup.
    pub excluded_times: Vec<f64>,
    /// Verdict on the term bounds and the chain at snapshots (None when no
    /// snapshot was audited).
    pub terms_ok: Option<bool>,
}

impl InequalityAudit {
    pub fn report(&self) -> AuditReport {
        let mut r = AuditReport::new("comparison_inequality");
        for rec in &self.records {
            if rec.excluded {
                r.excluded += 1;
            } else {
                r.check(rec.t, None, rec.dg_dt, rec.rhs, rec.slack, rec.tol);
            }
        }
        r
    }

    pub fn terms_report(&self) -> Option<AuditReport> {
        self.terms_ok?;
        let mut r = AuditReport::new("term_bounds");
        for tb in self.records.iter().filter_map(|rec| rec.terms.as_ref()) {
            let sum: f64 = tb.r.iter().sum();
            for i in 0..6 {
                r.check(tb.t, None, tb.r[i], tb.bounds[i], tb.r[i] - tb.bounds[i], tb.tol);
            }
            r.check(tb.t, None, sum, tb.chain_rhs, sum - tb.chain_rhs, tb.tol);
        }
        Some(r)
    }
}

fn excluded_from(rows: &[TraceRow], outcome: &Outcome) -> usize {
    match outcome {
        Outcome::Completed => rows.len(),
        _ => rows.len().saturating_sub(EXCLUDED_TAIL_STEPS + 1),
    }
}

/// Centered-difference slope of the recorded `𝒢` series against the
/// comparison law, with tolerance `c_audit (h² + Δt)(1 + 𝒢²)` where `Δt` is
/// the stencil width. Snapshot states, when given, are decomposed into
/// `ℛ₁…ℛ₆` and checked against their bounds.
#[allow(clippy::too_many_arguments)]
pub fn inequality_audit(
    rows: &[TraceRow],
    outcome: &Outcome,
    snapshots: &[Snapshot],
    grid: &Arc<Grid>,
    w: &WeightSpec,
    k: &LyapunovConstants,
    c_audit: f64,
) -> Result<InequalityAudit> {
    let h = grid.h();
    let cut = excluded_from(rows, outcome);
    let wg = if snapshots.is_empty() {
        None
    } else {
        Some(WeightOnGrid::new(w, grid)?)
    };
    let mut snap_iter = snapshots.iter().peekable();
    let mut records = Vec::new();
    let mut excluded_times = Vec::new();
    let mut overall = true;
    let mut terms_ok: Option<bool> = None;
    for i in 1..rows.len().saturating_sub(1) {
        let (prev, cur, next) = (rows[i - 1], rows[i], rows[i + 1]);
        let width = next.t - prev.t;
        let dg_dt = (next.g - prev.g) / width;
        let rhs = k.comparison_rhs(cur.t, cur.g);
        let slack = dg_dt - rhs;
        let tol = c_audit * (h * h + width) * (1.0 + cur.g * cur.g);
        let excluded = i >= cut;
        let pass = slack >= -tol;
        if excluded {
            excluded_times.push(cur.t);
        } else {
            overall &= pass;
        }
        while snap_iter.peek().is_some_and(|s| s.t < cur.t) {
            snap_iter.next();
        }
        let terms = match (snap_iter.peek(), &wg) {
            (Some(s), Some(wg)) if s.t == cur.t && !excluded => {
                let state = LayerState::from_values(grid.clone(), s.t, s.w.clone(), s.s.clone())?;
                let tb = term_bounds(&state, w, wg, k, c_audit)?;
                let ok = tb.ok.iter().all(|&b| b) && tb.chain_ok;
                terms_ok = Some(terms_ok.unwrap_or(true) && ok);
                Some(tb)
            }
            _ => None,
        };
        records.push(InequalityRecord {
            t: cur.t,
            g: cur.g,
            dg_dt,
            rhs,
            slack,
            tol,
            excluded,
            pass,
            terms,
        });
    }
    Ok(InequalityAudit {
        records,
        overall,
        excluded_times,
        terms_ok,
    })
}

/// `𝒢(t) ≥ lower_bound(t) − tol` at each row before the bound diverges and
/// before the excluded tail, `tol = c_audit (h² + dt)(1 + 𝒢²)`.
pub fn compare_trajectory(
    rows: &[TraceRow],
    outcome: &Outcome,
    h: f64,
    k: &LyapunovConstants,
    c_audit: f64,
) -> Result<AuditReport> {
    let mut report = AuditReport::new("comparison_trajectory");
    let Some(first) = rows.first() else {
        return Ok(report);
    };
    let g0 = first.g;
    let cut = excluded_from(rows, outcome);
    for (i, r) in rows.iter().enumerate() {
        if i >= cut {
            report.excluded += 1;
            continue;
        }
        // The comparison solution from G(0) = 0 is identically zero.
        let bound = if g0 > 0.0 { lower_bound(r.t, g0, k)? } else { Bound::Finite(0.0) };
        match bound {
            Bound::Diverged => {
                report.excluded += 1;
            }
            Bound::Finite(lb) => {
                let tol = c_audit * (h * h + r.dt) * (1.0 + r.g * r.g);
                report.check(r.t, None, r.g, lb, r.g - lb, tol);
            }
        }
    }
    Ok(report)
}

/// Detected blowup no later than 20% past the predicted time, when a time
/// was predicted within the horizon.
pub fn blowup_timing_audit(outcome: &Outcome, predicted: Option<f64>) -> AuditReport {
    let mut report = AuditReport::new("blowup_timing");
    if let Some(t_star) = predicted {
        let limit = 1.2 * t_star;
        match outcome.blowup_time() {
            Some(t_b) => report.check(t_b, None, t_b, limit, limit - t_b, 0.0),
            None => report.check(f64::NAN, None, f64::INFINITY, limit, f64::NEG_INFINITY, 0.0),
        }
    }
    report
}

/// Audit CSV: one row per centered-difference record, `R` cells filled at
/// snapshot rows only.
pub fn write_audit_csv(audit: &InequalityAudit, mut out: impl Write) -> Result<()> {
    writeln!(out, "{AUDIT_HEADER}")?;
    for rec in &audit.records {
        write!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            rec.t, rec.g, rec.dg_dt, rec.rhs, rec.slack
        )?;
        match &rec.terms {
            Some(tb) => {
                for r in tb.r {
                    write!(out, ",{r:.16e}")?;
                }
            }
            None => write!(out, ",,,,,,")?,
        }
        let verdict = if rec.excluded {
            "excluded"
        } else if rec.pass {
            "true"
        } else {
            "false"
        };
        writeln!(out, ",{verdict}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Field;
    use crate::weight::build_weight;

    fn grid() -> Arc<Grid> {
        Arc::new(Grid::new(20.0, 2000).unwrap())
    }

    #[test]
    fn zero_field_gives_zero_terms() {
        let g = grid();
        let w = build_weight(2.0, 16.0).unwrap();
        let n = g.len();
        let state = LayerState::from_values(g, 0.0, vec![0.0; n], vec![0.0; n]).unwrap();
        let r = decompose_rhs(&state, &LiftParams::zero(), &w).unwrap();
        assert_eq!(r, [0.0; 6]);
    }

    #[test]
    fn unit_field_terms() {
        let g = grid();
        let w = build_weight(2.0, 16.0).unwrap();
        let n = g.len();
        let mut ones = vec![1.0; n];
        ones[0] = 0.0;
        let state = LayerState::from_values(g.clone(), 0.0, ones, vec![0.0; n]).unwrap();
        let r = decompose_rhs(&state, &LiftParams::zero(), &w).unwrap();
        // R1 = ∫𝒴″ = −𝒴′(0) up to the first cell, where a drops to 0.
        let slope0 = w.eval(0.0).1;
        assert!((r[0] + slope0).abs() < 1e-2, "{} vs {}", r[0], -slope0);
        assert!((r[2] - 2.0 * w.c_y).abs() < 1e-3 * w.c_y);
        let _ = Field::zeros(g);
    }

    #[test]
    fn synthetic_constant_series_fails() {
        let k = LyapunovConstants::from_parts(1.5, 10.0, 0.0, 1.0, 0.0, 0.0).unwrap();
        let rows: Vec<TraceRow> = (0..50)
            .map(|i| TraceRow {
                t: i as f64 * 1e-4,
                dt: 1e-4,
                w_inf: 1.0,
                s_max: 0.0,
                a_min: 0.0,
                energy: 1.0,
                g: 100.0,
            })
            .collect();
        let g = Arc::new(Grid::new(10.0, 1000).unwrap());
        let w = build_weight(2.0, 16.0).unwrap();
        let audit = inequality_audit(&rows, &Outcome::Completed, &[], &g, &w, &k, DEFAULT_C_AUDIT).unwrap();
        assert!(!audit.overall);
        assert!(audit.records.iter().all(|r| r.slack < 0.0));
    }

    #[test]
    fn timing_audit_cases() {
        assert!(blowup_timing_audit(&Outcome::BlowupDetected(1.1), Some(1.0)).passed);
        assert!(!blowup_timing_audit(&Outcome::BlowupDetected(1.3), Some(1.0)).passed);
        assert!(!blowup_timing_audit(&Outcome::Completed, Some(1.0)).passed);
        assert!(blowup_timing_audit(&Outcome::Completed, None).passed);
    }
}
