//! Observed convergence orders of the layer solver on a manufactured
//! solution, in space (dt tied to h²) and in time (fine fixed grid).

use blowup_lab::solver::{mms_error, observed_orders, ManufacturedSolution};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m = ManufacturedSolution::new(0.5, 10.0);
    let horizon = 0.5;

    println!("space: h, dt, L2 error");
    let mut errors = Vec::new();
    for n_cells in [250, 500, 1000] {
        let h = m.y_max / n_cells as f64;
        let e = mms_error(&m, n_cells, horizon, 0.25 * h * h)?;
        println!("  {:.3} {:.2e} {:.4e}", e.h, e.dt, e.l2);
        errors.push(e.l2);
    }
    println!("  orders {:?}", observed_orders(&errors));

    println!("time: dt, L2 error (h = 0.0025)");
    let mut errors = Vec::new();
    for dt in [0.02, 0.01, 0.005, 0.0025] {
        let e = mms_error(&m, 4000, horizon, dt)?;
        println!("  {:.4} {:.4e}", e.dt, e.l2);
        errors.push(e.l2);
    }
    println!("  orders {:?}", observed_orders(&errors));
    Ok(())
}
