//! The linear axis system: zero data stays zero, and small data obeys the
//! Gronwall energy bound.

use std::sync::Arc;

use blowup_lab::grid::{Field, Grid};
use blowup_lab::solver::{axis_restriction_run, energy_audit, energy_growth_rate, AxisCoefficients};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = Arc::new(Grid::new(20.0, 2000)?);
    let c_t = 1.0;
    // Bounded coefficients with sup norms at most C_T.
    let coeffs = AxisCoefficients::new(
        |t, y| (-y).exp() * (1.0 + t).recip(),
        |_, y| -(1.0 - (-y).exp()),
        |t, y| (0.5 * y).sin() * (-t).exp(),
    );

    let zero = Field::zeros(grid.clone());
    let trivial = axis_restriction_run(&coeffs, &zero, &zero, &grid, 5.0, 1e-3)?;
    let peak = trivial.energy.iter().copied().fold(0.0, f64::max);
    println!("zero data: max energy over [0, 5] = {peak:e}");

    let w0 = Field::from_fn(grid.clone(), |y| 1e-2 * y * (-y).exp());
    let s0 = Field::from_fn(grid.clone(), |y| -1e-2 * y * y * (-y).exp());
    let run = axis_restriction_run(&coeffs, &w0, &s0, &grid, 5.0, 1e-3)?;
    let k = energy_growth_rate(c_t);
    println!("small data, K = {k}");
    for (t, e) in run.times.iter().zip(&run.energy).step_by(1000) {
        println!("  t = {t:.1}  E = {e:.6e}  bound = {:.6e}", run.energy[0] * (2.0 * k * t).exp());
    }
    println!("energy_bound: {}", energy_audit(&run, c_t).summary());
    Ok(())
}
