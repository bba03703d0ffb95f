//! The linear system on the symmetry axis `x = 0` with prescribed
//! coefficient fields:
//!
//! ```text
//! ∂_t w = ∂_y² w − s − w ∂ₓu − v ∂_y w,
//! ∂_t s = ∂_y² s − w ∂ₓθ − v ∂_y s + (∂_y w)²,
//! ```
//!
//! homogeneous Dirichlet data at both ends.

use std::sync::Arc;

use super::upwind;
use crate::audit::AuditReport;
use crate::error::{Error, Result};
use crate::grid::{trapz, Field, Grid};
use crate::tridiag::DirichletDiffusion;

type CoefFn = Box<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Coefficient fields `∂ₓu(t, y)`, `v(t, y)` and `∂ₓθ(t, y)` on the axis.
pub struct AxisCoefficients {
    pub dxu: CoefFn,
    pub v: CoefFn,
    pub dxtheta: CoefFn,
}

impl AxisCoefficients {
    pub fn new(
        dxu: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        v: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        dxtheta: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            dxu: Box::new(dxu),
            v: Box::new(v),
            dxtheta: Box::new(dxtheta),
        }
    }

    pub fn zero() -> Self {
        Self::new(|_, _| 0.0, |_, _| 0.0, |_, _| 0.0)
    }
}

impl std::fmt::Debug for AxisCoefficients {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("AxisCoefficients { .. }")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AxisTrace {
    pub times: Vec<f64>,
    /// `‖w‖²_{L²} + ‖s‖²_{L²}` by trapezoid quadrature.
    pub energy: Vec<f64>,
    pub diverged: bool,
    pub w: Field,
    pub s: Field,
}

/// Fixed-step IMEX evolution of the axis system up to `horizon`.
pub fn axis_restriction_run(
    coeffs: &AxisCoefficients,
    w0: &Field,
    s0: &Field,
    grid: &Arc<Grid>,
    horizon: f64,
    dt: f64,
) -> Result<AxisTrace> {
    if !(horizon > 0.0 && dt > 0.0 && dt.is_finite()) {
        return Err(Error::Domain("need horizon > 0 and dt > 0".into()));
    }
    if w0.grid().as_ref() != grid.as_ref() || s0.grid().as_ref() != grid.as_ref() {
        return Err(Error::InvalidGrid("initial fields live on a different grid".into()));
    }
    let n = grid.len();
    let last = n - 1;
    let h = grid.h();
    let inv_h = 1.0 / h;
    let y = grid.nodes();
    let mut w = w0.values().to_vec();
    let mut s = s0.values().to_vec();
    for f in [&mut w, &mut s] {
        f[0] = 0.0;
        f[last] = 0.0;
    }
    let energy_of = |w: &[f64], s: &[f64]| {
        let w2: Vec<f64> = w.iter().map(|x| x * x).collect();
        let s2: Vec<f64> = s.iter().map(|x| x * x).collect();
        trapz(h, &w2) + trapz(h, &s2)
    };
    let mut times = vec![0.0];
    let mut energy = vec![energy_of(&w, &s)];
    let steps = (horizon / dt).ceil() as usize;
    let step = horizon / steps as f64;
    let mut matrix = DirichletDiffusion::new(n, step / (h * h));
    let mut new_w = vec![0.0; n];
    let mut new_s = vec![0.0; n];
    let mut diverged = false;
    for j in 0..steps {
        let t = j as f64 * step;
        for k in 1..last {
            let (dxu, v, dxth) = ((coeffs.dxu)(t, y[k]), (coeffs.v)(t, y[k]), (coeffs.dxtheta)(t, y[k]));
            let dw = upwind(&w, k, v, inv_h);
            let ds = upwind(&s, k, v, inv_h);
            let wy = 0.5 * inv_h * (w[k + 1] - w[k - 1]);
            new_w[k] = w[k] + step * (-s[k] - w[k] * dxu - v * dw);
            new_s[k] = s[k] + step * (-w[k] * dxth - v * ds + wy * wy);
        }
        for f in [&mut new_w, &mut new_s] {
            f[0] = 0.0;
            f[last] = 0.0;
        }
        matrix.solve(&mut new_w);
        matrix.solve(&mut new_s);
        std::mem::swap(&mut w, &mut new_w);
        std::mem::swap(&mut s, &mut new_s);
        let e = energy_of(&w, &s);
        times.push((j + 1) as f64 * step);
        energy.push(e);
        if !e.is_finite() {
            diverged = true;
            break;
        }
    }
    let mut w = Field::new(grid.clone(), w)?;
    let mut s = Field::new(grid.clone(), s)?;
    if diverged {
        w.mark_diverged();
        s.mark_diverged();
    }
    Ok(AxisTrace {
        times,
        energy,
        diverged,
        w,
        s,
    })
}

/// Gronwall rate `K = 1 + C_T + (3/2) C_T + C_T²`.
pub fn energy_growth_rate(c_t: f64) -> f64 {
    1.0 + c_t + 1.5 * c_t + c_t * c_t
}

/// Checks `E(t) ≤ E(0) e^{2Kt} + 1e−8 (1 + E(0))` at every recorded time.
pub fn energy_audit(trace: &AxisTrace, c_t: f64) -> AuditReport {
    let mut report = AuditReport::new("energy_bound");
    let k = energy_growth_rate(c_t);
    let e0 = trace.energy.first().copied().unwrap_or(0.0);
    let tol = 1e-8 * (1.0 + e0);
    for (&t, &e) in trace.times.iter().zip(&trace.energy) {
        let bound = e0 * (2.0 * k * t).exp();
        report.check(t, None, e, bound, bound - e, tol);
    }
    if trace.diverged {
        report.passed = false;
    }
    report
}
