//! Crank–Nicolson solution of the lift heat problem, used as an
//! independent check of the closed form.

use super::{erf, LiftParams};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::tridiag::solve_in_place;

/// Number of backward-Euler half steps replacing the first CN step
/// (Rannacher start-up; damps the corner incompatibility at `t = y = 0`).
const STARTUP_HALF_STEPS: usize = 4;

/// Solves `∂_t φ − ∂_y² φ = C_P`, `φ(t,0) = 0`, `φ(t,y_max) = C_E + C_P t`,
/// `φ(0,y) = C_E erf(y/2)` and returns the nodal solution at each of
/// `times` (ascending, all `> 0`).
pub fn solve_lift_problem(p: &LiftParams, grid: &Grid, dt: f64, times: &[f64]) -> Result<Vec<Vec<f64>>> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::Domain(format!("dt must be positive, got {dt}")));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) || times.first().is_some_and(|&t| t <= 0.0) {
        return Err(Error::Domain("output times must be positive and increasing".into()));
    }
    let n = grid.len();
    let h2 = grid.h() * grid.h();
    let mut u: Vec<f64> = grid.nodes().iter().map(|&y| p.c_e() * erf(0.5 * y)).collect();
    let mut t = 0.0;
    let mut out = Vec::with_capacity(times.len());

    let mut lower = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut upper = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    let mut scratch = vec![0.0; n];

    // theta = 1 is backward Euler, theta = 1/2 Crank–Nicolson.
    let mut advance = |u: &mut Vec<f64>, t: f64, step: f64, theta: f64| {
        let c = step / h2;
        for k in 1..n - 1 {
            lower[k] = -theta * c;
            diag[k] = 1.0 + 2.0 * theta * c;
            upper[k] = -theta * c;
            let lap = u[k + 1] - 2.0 * u[k] + u[k - 1];
            rhs[k] = u[k] + (1.0 - theta) * c * lap + step * p.c_p();
        }
        lower[0] = 0.0;
        diag[0] = 1.0;
        upper[0] = 0.0;
        rhs[0] = 0.0;
        lower[n - 1] = 0.0;
        diag[n - 1] = 1.0;
        upper[n - 1] = 0.0;
        rhs[n - 1] = p.far_field(t + step);
        solve_in_place(&lower, &diag, &upper, &mut rhs, &mut scratch);
        u.copy_from_slice(&rhs);
    };

    let mut started = false;
    for &target in times {
        while t < target - 1e-12 * target {
            let step = dt.min(target - t);
            if !started {
                let half = step / STARTUP_HALF_STEPS as f64;
                for _ in 0..STARTUP_HALF_STEPS {
                    advance(&mut u, t, half, 1.0);
                    t += half;
                }
                started = true;
            } else {
                advance(&mut u, t, step, 0.5);
                t += step;
            }
        }
        t = target;
        out.push(u.clone());
    }
    Ok(out)
}

/// Nodal solution at `times` from Richardson extrapolation in `h`:
/// `(4 u_{h/2} − u_h) / 3` on the nodes of `grid`, both solves sharing `dt`.
pub fn solve_lift_problem_extrapolated(
    p: &LiftParams,
    grid: &Grid,
    dt: f64,
    times: &[f64],
) -> Result<Vec<Vec<f64>>> {
    let fine_grid = Grid::new(grid.y_max(), 2 * grid.n_cells())?;
    let coarse = solve_lift_problem(p, grid, dt, times)?;
    let fine = solve_lift_problem(p, &fine_grid, dt, times)?;
    Ok(coarse
        .iter()
        .zip(&fine)
        .map(|(c, f)| {
            c.iter()
                .enumerate()
                .map(|(k, &uc)| (4.0 * f[2 * k] - uc) / 3.0)
                .collect()
        })
        .collect())
}

/// Largest nodal gap between the closed form and the extrapolated
/// Crank–Nicolson solution at each of `times`.
pub fn closed_form_discrepancy(p: &LiftParams, grid: &Grid, dt: f64, times: &[f64]) -> Result<Vec<f64>> {
    let numeric = solve_lift_problem_extrapolated(p, grid, dt, times)?;
    Ok(times
        .iter()
        .zip(&numeric)
        .map(|(&t, u)| {
            grid.nodes()
                .iter()
                .zip(u)
                .map(|(&y, v)| (super::phi_unchecked(t, y, p) - v).abs())
                .fold(0.0, f64::max)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_inputs() {
        let g = Grid::new(10.0, 100).unwrap();
        let p = LiftParams::new(1.0, 1.0).unwrap();
        assert!(solve_lift_problem(&p, &g, 0.0, &[1.0]).is_err());
        assert!(solve_lift_problem(&p, &g, 0.01, &[1.0, 0.5]).is_err());
        assert!(solve_lift_problem(&p, &g, 0.01, &[0.0]).is_err());
    }

    #[test]
    fn zero_data_stays_zero() {
        let g = Grid::new(10.0, 100).unwrap();
        let u = solve_lift_problem(&LiftParams::zero(), &g, 0.01, &[0.5]).unwrap();
        assert!(u[0].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn closed_form_matches_numerical_solve_on_coarse_grid() {
        let g = Grid::new(40.0, 2000).unwrap();
        let p = LiftParams::new(2.0, 3.0).unwrap();
        let gaps = closed_form_discrepancy(&p, &g, 2e-3, &[0.5, 2.0]).unwrap();
        for gap in gaps {
            assert!(gap < 1e-5, "gap {gap}");
        }
    }
}
