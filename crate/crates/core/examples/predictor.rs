//! Blowup threshold and predicted blowup times for a certified weight,
//! with and without outer-flow forcing.

use blowup_lab::lift::LiftParams;
use blowup_lab::lyapunov::{predict_blowup_time, threshold_g0, LyapunovConstants};
use blowup_lab::weight::search_parameters;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let w = search_parameters(&[2.0], 1.0, 2.0, 1024.0, 256)?.weight;
    let horizon = 2.0;
    for (c_e, c_p) in [(0.0, 0.0), (0.5, 0.0), (0.5, 0.1)] {
        let k = LyapunovConstants::new(&w, &LiftParams::new(c_e, c_p)?)?;
        let threshold = threshold_g0(horizon, &k)?;
        println!("C_E = {c_e}, C_P = {c_p}: threshold G(0) for T = {horizon}: {threshold:.6}");
        for factor in [0.5, 1.0, 1.5, 4.0, 16.0] {
            let g0 = factor * threshold;
            let t = predict_blowup_time(g0, &k, horizon)?;
            let shown = t.map(|t| format!("{t:.6}")).unwrap_or_else(|| "none".into());
            println!("  G(0) = {g0:>12.4}  t* = {shown}");
        }
    }
    // Without forcing the comparison law integrates in closed form.
    let k = LyapunovConstants::new(&w, &LiftParams::zero())?;
    let g0 = 500.0;
    let closed = -(1.0 - k.lambda / (k.blowup_coefficient() * g0)).ln() / k.lambda;
    println!("closed form {closed:.15}, bisection {:.15}", predict_blowup_time(g0, &k, 10.0)?.unwrap());
    Ok(())
}
