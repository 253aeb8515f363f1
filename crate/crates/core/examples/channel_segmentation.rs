//! One pass through the channel, then runs, super-runs and parent blocks.

use deletion_capacity::channel::{modified_mask, parent_segmentation, segment_runs, segment_super_runs, transmit};
use deletion_capacity::sources::BinarySequence;

fn main() -> deletion_capacity::error::Result<()> {
    let x: BinarySequence = "0011101001000110101".parse()?;
    let r = transmit(&x, 0.2, 11)?;
    println!("x    {x}\nmask {}\ny    {}", r.mask, r.y);

    let runs: Vec<String> = segment_runs(&x).iter().map(|r| format!("{}x{}", r.value, r.len)).collect();
    println!("runs {}", runs.join(" "));
    for t in segment_super_runs(&x) {
        println!("super-run l_rep = {} l_alt = {}", t.l_rep, t.l_alt);
    }

    let p = parent_segmentation(&x, &r.mask)?;
    for (xb, yb) in p.x_blocks.iter().zip(&p.y_blocks) {
        println!("{xb:>10} -> {yb}");
    }
    println!("K = {:?}", p.k);

    let (hat, reversed) = modified_mask(&x, &r.mask)?;
    println!("modified mask {hat} (reversed {} deletions)", reversed.weight());
    Ok(())
}
