//! Certifies the lift for a few (C_E, C_P) pairs and compares the closed
//! form with a Crank–Nicolson solve of its defining heat problem.

use blowup_lab::grid::Grid;
use blowup_lab::lift::numerical::closed_form_discrepancy;
use blowup_lab::lift::{phi, verify_lift_properties, LiftParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = Grid::new(40.0, 4000)?;
    let times = [0.1, 1.0, 10.0];
    for (c_e, c_p) in [(1.0, 0.0), (0.0, 1.0), (2.0, 3.0)] {
        let p = LiftParams::new(c_e, c_p)?;
        println!("C_E = {c_e}, C_P = {c_p}");
        print!("{}", verify_lift_properties(&p, &grid, &times)?);
        let gaps = closed_form_discrepancy(&p, &grid, 5e-4, &times)?;
        for (t, g) in times.iter().zip(gaps) {
            println!("  max |closed form - numerical| at t = {t}: {g:.3e}");
        }
        println!("  profile at t = 1: {:?}\n", [0.5, 1.0, 2.0, 4.0, 8.0].map(|y| phi(1.0, y, &p).unwrap()));
    }
    Ok(())
}
