//! Manufactured solution for the layer system:
//!
//! ```text
//! w̃* = e^{−t} y e^{−y},   s̃* = −c e^{−t} (1 − e^{−y}),   P̄ = 0,
//! ```
//!
//! with the analytic residual injected as a source.

use std::sync::Arc;

use super::{Forcing, LayerState, Stepper};
use crate::error::{Error, Result};
use crate::grid::{trapz, Grid};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManufacturedSolution {
    pub c: f64,
    pub y_max: f64,
}

impl ManufacturedSolution {
    pub fn new(c: f64, y_max: f64) -> Self {
        Self { c, y_max }
    }

    /// `(w̃*, s̃*)` at `(t, y)`.
    pub fn exact(&self, t: f64, y: f64) -> (f64, f64) {
        let et = (-t).exp();
        let ey = (-y).exp();
        (et * y * ey, -self.c * et * (1.0 - ey))
    }
}

impl Forcing for ManufacturedSolution {
    fn p_bar(&self, _t: f64) -> f64 {
        0.0
    }
    fn u_bar_e(&self, t: f64) -> f64 {
        self.exact(t, self.y_max).0
    }
    fn s_wall(&self, t: f64) -> f64 {
        self.exact(t, 0.0).1
    }
    fn s_far(&self, t: f64) -> f64 {
        self.exact(t, self.y_max).1
    }

    fn source(&self, t: f64, y: f64) -> (f64, f64) {
        let et = (-t).exp();
        let ey = (-y).exp();
        let (w, s) = self.exact(t, y);
        let w_t = -w;
        let w_y = et * (1.0 - y) * ey;
        let w_yy = et * (y - 2.0) * ey;
        let v = et * (1.0 - (1.0 + y) * ey);
        let s_t = -s;
        let s_y = -self.c * et * ey;
        let s_yy = self.c * et * ey;
        let src_w = w_t - w_yy - w * w + v * w_y + s;
        let src_s = s_t - s_yy - w * s + v * s_y;
        (src_w, src_s)
    }

    fn has_source(&self) -> bool {
        true
    }
}

/// Discrete errors at the final time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmsError {
    pub h: f64,
    pub dt: f64,
    /// `max(‖w̃ − w̃*‖_{L²}, ‖s̃ − s̃*‖_{L²})`.
    pub l2: f64,
    pub sup: f64,
}

/// Runs the manufactured problem with a fixed step up to `horizon`.
pub fn mms_error(m: &ManufacturedSolution, n_cells: usize, horizon: f64, dt: f64) -> Result<MmsError> {
    if !(horizon > 0.0 && dt > 0.0) {
        return Err(Error::Domain("need horizon > 0 and dt > 0".into()));
    }
    let grid = Arc::new(Grid::new(m.y_max, n_cells)?);
    let (w0, s0): (Vec<f64>, Vec<f64>) = grid.nodes().iter().map(|&y| m.exact(0.0, y)).unzip();
    let mut state = LayerState::from_values(grid.clone(), 0.0, w0, s0)?;
    let steps = (horizon / dt).round().max(1.0) as usize;
    let step = horizon / steps as f64;
    let mut stepper = Stepper::new(grid.clone());
    for _ in 0..steps {
        state = stepper.advance(&state, m, step, f64::INFINITY)?;
        if state.diverged {
            return Err(Error::Diverged);
        }
    }
    let mut ew = Vec::with_capacity(grid.len());
    let mut es = Vec::with_capacity(grid.len());
    for (k, &y) in grid.nodes().iter().enumerate() {
        let (w, s) = m.exact(state.t, y);
        ew.push(state.w.values()[k] - w);
        es.push(state.s.values()[k] - s);
    }
    let l2 = |e: &[f64]| trapz(grid.h(), &e.iter().map(|x| x * x).collect::<Vec<_>>()).sqrt();
    let sup = ew.iter().chain(&es).fold(0.0_f64, |a, x| a.max(x.abs()));
    Ok(MmsError {
        h: grid.h(),
        dt: step,
        l2: l2(&ew).max(l2(&es)),
        sup,
    })
}

/// `log2(e_coarse / e_fine)` for consecutive entries.
pub fn observed_orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|p| (p[0] / p[1]).log2()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn source_vanishes_only_for_the_exact_pde() {
        // residual of a stationary zero state is the negative of the source
        let m = ManufacturedSolution::new(0.3, 10.0);
        let (sw, ss) = m.source(0.0, 0.0);
        // at y = 0: w = 0, w_yy = −2, v = 0, s = 0, s_t = 0, s_yy = c
        assert!((sw - 2.0).abs() < 1e-15);
        assert!((ss + 0.3).abs() < 1e-15);
    }

    #[test]
    fn error_shrinks_with_refinement() {
        let m = ManufacturedSolution::new(0.5, 8.0);
        let a = mms_error(&m, 100, 0.1, 0.5 * 0.08 * 0.08).unwrap();
        let b = mms_error(&m, 200, 0.1, 0.5 * 0.04 * 0.04).unwrap();
        assert!(b.l2 < a.l2 / 3.0, "{a:?} {b:?}");
    }
}
