//! The weighted functional `𝒢(t) = ∫₀^∞ a 𝒴 dy` and its Riccati comparison
//! law
//!
//! ```text
//! 𝒢′ ≥ κ 𝒢² − [λ + (3+μ)(C_E + C_P t)] 𝒢,     κ = 2(1 − η⁻¹)/C_𝒴,
//! ```
//!
//! which gives `𝒢(t) ≥ Ψ(t) / (1/𝒢(0) − κ ∫₀ᵗ Ψ)` with
//! `Ψ(t) = exp(−[λt + (3+μ)C_E t + (3+μ)C_P t²/2])`.

mod audit;
mod quadrature;

pub use audit::{
    blowup_timing_audit, compare_trajectory, decompose_rhs, forcing_audit, inequality_audit, term_bounds,
    write_audit_csv, InequalityAudit, InequalityRecord, TermBounds, AUDIT_HEADER, DEFAULT_C_AUDIT,
    EXCLUDED_TAIL_STEPS,
};

use crate::error::{Error, Result};
use crate::grid::{trapz, Field, Grid};
use crate::lift::LiftParams;
use crate::weight::{choose_eta, WeightSpec};

/// Tolerance of the adaptive quadrature of `Ψ`.
pub const PSI_QUADRATURE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovConstants {
    pub eta: f64,
    pub c_y: f64,
    pub lambda: f64,
    pub mu: f64,
    pub c_e: f64,
    pub c_p: f64,
    /// `σ` of the weight the constants came from, if any.
    pub sigma: Option<f64>,
}

impl LyapunovConstants {
    /// Constants of a certified weight and a lift, with `η` from [`choose_eta`].
    pub fn new(w: &WeightSpec, p: &LiftParams) -> Result<Self> {
        let eta = choose_eta(w.sigma)?;
        let mut k = Self::from_parts(eta, w.c_y, w.lambda, w.mu, p.c_e(), p.c_p())?;
        k.sigma = Some(w.sigma);
        Ok(k)
    }

    pub fn from_parts(eta: f64, c_y: f64, lambda: f64, mu: f64, c_e: f64, c_p: f64) -> Result<Self> {
        if !(eta > 1.0 && eta < 2.0) {
            return Err(Error::Domain(format!("eta must lie in (1, 2), got {eta}")));
        }
        if !(c_y.is_finite() && c_y > 0.0) {
            return Err(Error::Domain(format!("C_Y must be positive, got {c_y}")));
        }
        if !(lambda >= 0.0 && mu > 0.0 && c_e >= 0.0 && c_p >= 0.0) {
            return Err(Error::Domain("need lambda, c_e, c_p >= 0 and mu > 0".into()));
        }
        if ![lambda, mu, c_e, c_p].iter().all(|x| x.is_finite()) {
            return Err(Error::Domain("constants must be finite".into()));
        }
        Ok(Self {
            eta,
            c_y,
            lambda,
            mu,
            c_e,
            c_p,
            sigma: None,
        })
    }

    /// `η σ < 1` for the source weight (true when no weight is attached).
    pub fn eta_sigma_ok(&self) -> bool {
        self.sigma.map_or(true, |s| self.eta * s < 1.0)
    }

    /// `κ = (2 − 2η⁻¹)/C_𝒴`.
    pub fn blowup_coefficient(&self) -> f64 {
        (2.0 - 2.0 / self.eta) / self.c_y
    }

    /// Linear damping rate `λ + (3+μ)(C_E + C_P t)`.
    pub fn damping(&self, t: f64) -> f64 {
        self.lambda + (3.0 + self.mu) * (self.c_e + self.c_p * t)
    }

    /// Right side of the comparison law at `(t, G)`.
    pub fn comparison_rhs(&self, t: f64, g: f64) -> f64 {
        self.blowup_coefficient() * g * g - self.damping(t) * g
    }

    pub fn lift(&self) -> LiftParams {
        LiftParams::new(self.c_e, self.c_p).expect("validated at construction")
    }
}

/// `𝒴`, `𝒴′`, `𝒴″` sampled on a grid, with closed-form data for the part of
/// the half-line beyond `y_max`. At `y = β`, where `𝒴″` jumps, the nodal
/// `𝒴″` is the mean of the one-sided values.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightOnGrid {
    pub h: f64,
    pub values: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
    /// `∫_{y_max}^∞ 𝒴`.
    pub tail_mass: f64,
    pub tail_value: f64,
    pub tail_slope: f64,
}

impl WeightOnGrid {
    pub fn new(w: &WeightSpec, grid: &Grid) -> Result<Self> {
        if grid.y_max() < w.delta {
            return Err(Error::InvalidGrid(format!(
                "y_max = {} must be at least {} to hold the weight's polynomial part",
                grid.y_max(),
                w.delta
            )));
        }
        let n = grid.len();
        let (mut values, mut d1, mut d2) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
        for &y in grid.nodes() {
            let (v, p, mut q) = w.eval(y);
            if y == w.beta {
                q = 0.5 * (q + w.eval_left(y).2);
            }
            values.push(v);
            d1.push(p);
            d2.push(q);
        }
        let (tail_value, tail_slope, _) = w.eval(grid.y_max());
        Ok(Self {
            h: grid.h(),
            values,
            d1,
            d2,
            tail_mass: w.tail_integral(grid.y_max()),
            tail_value,
            tail_slope,
        })
    }

    /// `∫ a 𝒴` over the grid plus `a(y_max) ∫_{y_max}^∞ 𝒴`.
    pub fn functional_values(&self, a: &[f64]) -> f64 {
        let prod: Vec<f64> = a.iter().zip(&self.values).map(|(a, y)| a * y).collect();
        trapz(self.h, &prod) + a[a.len() - 1] * self.tail_mass
    }
}

/// `𝒢 = ∫₀^∞ a 𝒴 dy`, the part beyond `y_max` taken with `a ≡ a(y_max)`.
pub fn functional(a: &Field, w: &WeightSpec) -> Result<f64> {
    if a.is_diverged() || !a.is_finite() {
        return Err(Error::Diverged);
    }
    Ok(WeightOnGrid::new(w, a.grid())?.functional_values(a.values()))
}

/// `Ψ(t) = exp(−[λt + (3+μ)C_E t + (3+μ)C_P t²/2])`.
pub fn psi(t: f64, k: &LyapunovConstants) -> f64 {
    let m3 = 3.0 + k.mu;
    (-(k.lambda * t + m3 * k.c_e * t + 0.5 * m3 * k.c_p * t * t)).exp()
}

/// `∫₀ᵗ Ψ` by adaptive Simpson quadrature.
pub fn psi_integral(t: f64, k: &LyapunovConstants) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    quadrature::adaptive_simpson(|s| psi(s, k), 0.0, t, PSI_QUADRATURE_TOL)
}

/// Value of the comparison lower bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    Finite(f64),
    /// The denominator has reached zero: the bound (and `𝒢`) has blown up.
    Diverged,
}

pub fn lower_bound(t: f64, g0: f64, k: &LyapunovConstants) -> Result<Bound> {
    if !(g0 > 0.0) {
        return Err(Error::Domain(format!("G(0) must be positive, got {g0}")));
    }
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("t must be >= 0, got {t}")));
    }
    let bracket = 1.0 / g0 - k.blowup_coefficient() * psi_integral(t, k);
    Ok(if bracket <= 0.0 {
        Bound::Diverged
    } else {
        Bound::Finite(psi(t, k) / bracket)
    })
}

/// Smallest `t* ≤ horizon` with `∫₀^{t*} Ψ = 1/(κ G(0))`, or `None` when the
/// integral over the horizon falls short. Bisection runs until the bracket
/// stops shrinking in floating point.
pub fn predict_blowup_time(g0: f64, k: &LyapunovConstants, horizon: f64) -> Result<Option<f64>> {
    if !(g0 > 0.0) {
        return Err(Error::Domain(format!("G(0) must be positive, got {g0}")));
    }
    if !(horizon > 0.0) {
        return Err(Error::Domain(format!("horizon must be positive, got {horizon}")));
    }
    let budget = 1.0 / (k.blowup_coefficient() * g0);
    if !budget.is_finite() || psi_integral(horizon, k) < budget {
        return Ok(None);
    }
    let (mut lo, mut hi) = (0.0_f64, horizon);
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if psi_integral(mid, k) >= budget {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}

/// `C_𝒴/(2 − 2η⁻¹) · (∫₀^{T/2} Ψ)⁻¹`.
pub fn threshold_g0(horizon: f64, k: &LyapunovConstants) -> Result<f64> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::Domain(format!("horizon must be positive, got {horizon}")));
    }
    Ok(1.0 / (k.blowup_coefficient() * psi_integral(0.5 * horizon, k)))
}
