//! Runs a scenario file (the bundled blowup demo by default), prints its
//! summary and compares the Lyapunov functional with the comparison bound.
//!
//! ```text
//! cargo run --release --example blowup_scenario -- [path/to/scenario.cfg]
//! ```

use blowup_lab::lyapunov::{lower_bound, Bound};
use blowup_lab::scenario::{execute, parse_config};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/examples/configs/blowup.cfg").into());
    let run = execute(&parse_config(&path)?)?;
    print!("{}", run.summary_text());

    println!("\n{:>14} {:>14} {:>14}", "t", "G", "lower bound");
    let rows = &run.trace.rows;
    let stride = (rows.len() / 12).max(1);
    for r in rows.iter().step_by(stride) {
        let lb = if run.g0 > 0.0 {
            match lower_bound(r.t, run.g0, &run.constants)? {
                Bound::Finite(x) => format!("{x:.6e}"),
                Bound::Diverged => "diverged".into(),
            }
        } else {
            "0".into()
        };
        println!("{:>14.6e} {:>14.6e} {:>14}", r.t, r.g, lb);
    }
    Ok(())
}
