//! Prints the series constants and the truncation certificate.

use deletion_capacity::constants::{compute_constants, DEFAULT_TOLERANCE};

fn main() -> deletion_capacity::error::Result<()> {
    let c = compute_constants(DEFAULT_TOLERANCE)?;
    println!("cutoff L = {} (certified error <= {:.1e})", c.cutoff, c.truncation_error_bound);
    for (name, v) in [
        ("c2", c.c2),
        ("A1", c.a1),
        ("A2", c.a2),
        ("c3", c.c3),
        ("c4", c.c4),
        ("c5", c.c5),
        ("A2'", c.a2_prime),
    ] {
        println!("{name:>4} = {v:.10}");
    }
    println!("A1 - (log2(2e) - c2/(2 ln 2)) = {:.2e}", c.a1 - c.a1_from_c2());
    Ok(())
}
