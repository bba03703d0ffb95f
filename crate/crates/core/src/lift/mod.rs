//! The lift function `φ(t, y)` added to `w̃` so the working unknown
//! `a = w̃ + φ` is nonnegative.
//!
//! `φ` solves `∂_t φ − ∂_y² φ = C_P` on the half-line with `φ(t, 0) = 0`,
//! `φ(t, ∞) = C_E + C_P t` and `φ(0, y) = C_E erf(y/2)`. It is evaluated in
//! closed form; [`numerical`] provides an independent Crank–Nicolson solve
//! of the same problem used to cross-check the closed form.

mod erf;
pub mod numerical;

use std::f64::consts::PI;

pub use erf::{erf, erfc, erfcx};

use crate::error::{Error, Result};
use crate::grid::{diff2, Grid};

/// Constants `C_E = −inf min(Ū^E, 0)` and `C_P = sup max(P̄, 0)` over the horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiftParams {
    c_e: f64,
    c_p: f64,
}

impl LiftParams {
    pub fn new(c_e: f64, c_p: f64) -> Result<Self> {
        if !(c_e.is_finite() && c_e >= 0.0 && c_p.is_finite() && c_p >= 0.0) {
            return Err(Error::Domain(format!(
                "lift constants must be finite and nonnegative, got C_E = {c_e}, C_P = {c_p}"
            )));
        }
        Ok(Self { c_e, c_p })
    }

    pub fn zero() -> Self {
        Self { c_e: 0.0, c_p: 0.0 }
    }

    pub fn c_e(&self) -> f64 {
        self.c_e
    }

    pub fn c_p(&self) -> f64 {
        self.c_p
    }

    /// `C_E + C_P t`, the far-field value and the upper bound of `φ(t, ·)`.
    pub fn far_field(&self, t: f64) -> f64 {
        self.c_e + self.c_p * t
    }

    pub fn is_zero(&self) -> bool {
        self.c_e == 0.0 && self.c_p == 0.0
    }
}

fn check_point(t: f64, y: f64) -> Result<()> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::Domain(format!("lift time must be >= 0, got {t}")));
    }
    if !(y.is_finite() && y >= 0.0) {
        return Err(Error::Domain(format!("lift coordinate must be >= 0, got {y}")));
    }
    Ok(())
}

/// Closed-form `φ(t, y)`. At `t = 0` returns exactly `C_E erf(y/2)`.
pub fn phi(t: f64, y: f64, p: &LiftParams) -> Result<f64> {
    check_point(t, y)?;
    Ok(phi_unchecked(t, y, p))
}

pub(crate) fn phi_unchecked(t: f64, y: f64, p: &LiftParams) -> f64 {
    if t == 0.0 {
        return p.c_e * erf(0.5 * y);
    }
    let e_part = if p.c_e == 0.0 {
        0.0
    } else {
        p.c_e * erf(y / (2.0 * (t + 1.0).sqrt()))
    };
    let p_part = if p.c_p == 0.0 {
        0.0
    } else {
        // C_P [ t − (t + y²/2) erfc(ξ) + y √(t/π) e^{−ξ²} ],  ξ = y / √(4t)
        let xi = y / (2.0 * t.sqrt());
        let gauss = (-xi * xi).exp();
        p.c_p * (t - (t + 0.5 * y * y) * erfc(xi) + y * (t / PI).sqrt() * gauss)
    };
    e_part + p_part
}

/// `(∂_y φ, ∂_y² φ)` from the differentiated closed form. Requires `t > 0`.
pub fn phi_derivatives(t: f64, y: f64, p: &LiftParams) -> Result<(f64, f64)> {
    check_point(t, y)?;
    if t <= 0.0 {
        return Err(Error::Domain(
            "lift derivatives need t > 0 (the closed form has 1/√t factors)".into(),
        ));
    }
    Ok(derivatives_unchecked(t, y, p))
}

/// Same as [`phi_derivatives`] but continuous-extended to `t = 0` by the
/// one-sided limits `t → 0⁺`.
pub(crate) fn derivatives_unchecked(t: f64, y: f64, p: &LiftParams) -> (f64, f64) {
    let tau = t + 1.0;
    let g = (-y * y / (4.0 * tau)).exp();
    let d1_e = p.c_e * g / (PI * tau).sqrt();
    let d2_e = -p.c_e * y * g / (2.0 * tau * (PI * tau).sqrt());
    if p.c_p == 0.0 {
        return (d1_e, d2_e);
    }
    if t == 0.0 {
        let d2_p = if y == 0.0 { -p.c_p } else { 0.0 };
        return (d1_e, d2_e + d2_p);
    }
    let xi = y / (2.0 * t.sqrt());
    let gauss = (-xi * xi).exp();
    let d1_p = if gauss == 0.0 {
        0.0
    } else {
        p.c_p * gauss * (2.0 * (t / PI).sqrt() - y * erfcx(xi))
    };
    let d2_p = -p.c_p * erfc(xi);
    (d1_e + d1_p, d2_e + d2_p)
}

/// `φ(t, ·)` sampled on every node of `grid`.
pub fn phi_on_grid(t: f64, grid: &Grid, p: &LiftParams) -> Vec<f64> {
    if p.is_zero() {
        return vec![0.0; grid.len()];
    }
    grid.nodes().iter().map(|&y| phi_unchecked(t, y, p)).collect()
}

/// `∂_y φ(t, ·)` sampled on every node of `grid` (limit values at `t = 0`).
pub fn phi_dy_on_grid(t: f64, grid: &Grid, p: &LiftParams) -> Vec<f64> {
    if p.is_zero() {
        return vec![0.0; grid.len()];
    }
    grid.nodes()
        .iter()
        .map(|&y| derivatives_unchecked(t, y, p).0)
        .collect()
}

/// Outcome of one certified property.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyRecord {
    pub name: &'static str,
    pub passed: bool,
    /// Smallest `allowed − observed` over all samples; negative means violated.
    pub worst_margin: f64,
    pub worst_t: f64,
    pub worst_y: f64,
}

impl PropertyRecord {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            passed: true,
            worst_margin: f64::INFINITY,
            worst_t: f64::NAN,
            worst_y: f64::NAN,
        }
    }

    fn observe(&mut self, margin: f64, tol: f64, t: f64, y: f64) {
        if margin < self.worst_margin || margin.is_nan() {
            self.worst_margin = margin;
            self.worst_t = t;
            self.worst_y = y;
        }
        if !(margin >= -tol) {
            self.passed = false;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyReport {
    /// Monotonicity, nonnegativity, upper bound, concavity, in that order.
    pub properties: [PropertyRecord; 4],
    /// Heat-equation residual `|∂_t φ − ∂_y² φ − C_P|` against its allowance.
    pub residual: PropertyRecord,
    pub overall: bool,
}

impl PropertyReport {
    pub fn records(&self) -> impl Iterator<Item = &PropertyRecord> {
        self.properties.iter().chain(std::iter::once(&self.residual))
    }
}

impl std::fmt::Display for PropertyReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for r in self.records() {
            writeln!(
                f,
                "{:<20} {} worst margin {:+.3e} at t = {}, y = {}",
                r.name,
                if r.passed { "pass" } else { "FAIL" },
                r.worst_margin,
                r.worst_t,
                r.worst_y
            )?;
        }
        writeln!(f, "overall: {}", if self.overall { "pass" } else { "fail" })
    }
}

/// Allowance for the stencil residual at time `t`: `1e−8` plus twice the
/// leading truncation term `h²/12 · max|∂_y⁴ φ|`, with the fourth derivative
/// bounded analytically (`max|erf⁗| < 4.42`, `max ξe^{−ξ²} = (2e)^{−1/2}`).
fn residual_allowance(t: f64, h: f64, p: &LiftParams) -> f64 {
    let d4_e = 0.28 * p.c_e / ((t + 1.0) * (t + 1.0));
    let d4_p = 0.25 * p.c_p / t;
    1e-8 + 2.0 * h * h / 12.0 * (d4_e + d4_p)
}

/// Heat-equation residual of the closed form at `(t, y)` using the three-point
/// stencil of spacing `h` in `y` and a fourth-order central difference in `t`.
pub fn heat_residual(t: f64, y: f64, h: f64, p: &LiftParams) -> f64 {
    let dt = 1e-3 * t;
    let f = |s: f64| phi_unchecked(s, y, p);
    let phi_t = (-f(t + 2.0 * dt) + 8.0 * f(t + dt) - 8.0 * f(t - dt) + f(t - 2.0 * dt)) / (12.0 * dt);
    let c = phi_unchecked(t, y, p);
    let phi_yy = (phi_unchecked(t, y + h, p) - 2.0 * c + phi_unchecked(t, y - h, p)) / (h * h);
    phi_t - phi_yy - p.c_p
}

/// Checks monotonicity, `0 ≤ φ ≤ C_E + C_P t`, concavity and the heat
/// residual at every `(t, node)` pair.
pub fn verify_lift_properties(p: &LiftParams, grid: &Grid, times: &[f64]) -> Result<PropertyReport> {
    if times.is_empty() {
        return Err(Error::Domain("need at least one time".into()));
    }
    if let Some(&t) = times.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return Err(Error::Domain(format!("times must be >= 0, got {t}")));
    }
    let mut mono = PropertyRecord::new("dy_phi >= 0");
    let mut nonneg = PropertyRecord::new("phi >= 0");
    let mut upper = PropertyRecord::new("phi <= C_E + C_P t");
    let mut concave = PropertyRecord::new("dyy_phi <= 0");
    let mut residual = PropertyRecord::new("heat residual");
    let h = grid.h();
    let mut stencil = vec![0.0; grid.len()];

    for &t in times {
        let tol = 1e-10 * (1.0 + p.c_e + p.c_p * t);
        let values = phi_on_grid(t, grid, p);
        for (&y, &v) in grid.nodes().iter().zip(&values) {
            let (d1, d2) = derivatives_unchecked(t, y, p);
            mono.observe(d1, tol, t, y);
            nonneg.observe(v, tol, t, y);
            upper.observe(p.far_field(t) - v, tol, t, y);
            concave.observe(-d2, tol, t, y);
        }
        if t > 0.0 {
            // Residual on interior nodes: grid stencil for ∂_y², fourth-order
            // central difference in time.
            diff2(h, &values, &mut stencil);
            let allowance = residual_allowance(t, h, p);
            let dt = 1e-3 * t;
            let before2 = phi_on_grid(t - 2.0 * dt, grid, p);
            let before = phi_on_grid(t - dt, grid, p);
            let after = phi_on_grid(t + dt, grid, p);
            let after2 = phi_on_grid(t + 2.0 * dt, grid, p);
            for k in 1..grid.len() - 1 {
                let phi_t = (-after2[k] + 8.0 * after[k] - 8.0 * before[k] + before2[k]) / (12.0 * dt);
                let r = (phi_t - stencil[k] - p.c_p).abs();
                residual.observe(allowance - r, 0.0, t, grid.nodes()[k]);
            }
        }
    }
    let properties = [mono, nonneg, upper, concave];
    let overall = properties.iter().all(|r| r.passed) && residual.passed;
    Ok(PropertyReport {
        properties,
        residual,
        overall,
    })
}
