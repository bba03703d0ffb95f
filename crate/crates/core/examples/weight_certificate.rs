//! Searches the weight family for several tail exponents and prints the
//! constraint certificate of each hit, then re-validates at 4x density.

use blowup_lab::weight::{build_weight, search_parameters, validate_constraints};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for n in [1.5, 2.0, 3.0] {
        let hit = search_parameters(&[n], 1.0, 2.0, 1024.0, 256)?;
        println!("{}{}", hit.weight, hit.report);
        let dense = validate_constraints(&hit.weight, 1024)?;
        println!("re-validated at 1024 samples per piece: {}\n", dense.overall);
    }
    // Too small a tail offset breaks the balance between the middle pieces.
    let bad = validate_constraints(&build_weight(2.0, 0.1)?, 256)?;
    println!("n = 2, M = 0.1:\n{bad}");
    Ok(())
}
