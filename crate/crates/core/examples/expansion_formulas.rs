//! Closed-form small-d expansions evaluated on the geometric law.

use deletion_capacity::analytics::{hat_d_entropy_formula, hy_given_x_formula, k_entropy_formula};
use deletion_capacity::constants::default_constants;
use deletion_capacity::sources::geometric_half;

fn main() -> deletion_capacity::error::Result<()> {
    let c = default_constants();
    let p = geometric_half(64)?;
    println!("       d     H(D^)      H(K)/d^2   H(Y|X) per bit");
    for d in [0.001, 0.01, 0.02, 0.05] {
        let hd = hat_d_entropy_formula(&p, d)?.value;
        let k = k_entropy_formula(&p, d)?.value / (d * d);
        let hy = hy_given_x_formula(&p, d, c)?.value;
        println!("{d:8.3}  {hd:.6}  {k:.6}  {hy:.6}");
    }
    println!("c4 = {:.6}", c.c4);
    Ok(())
}
