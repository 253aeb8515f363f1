//! C_est beside the best known bounds, flagging where it overshoots the upper bound.

use deletion_capacity::cli::{render_table, run_table, BoundsTable, OutputFormat};
use deletion_capacity::constants::default_constants;

fn main() -> deletion_capacity::error::Result<()> {
    let rows = run_table(&BoundsTable::shipped(), default_constants())?;
    print!("{}", render_table(&rows, OutputFormat::Csv)?);
    for r in rows.iter().filter(|r| r.exceeds_upper()) {
        println!("# d = {:.2}: C_est {:.4} > upper {:.4}", r.d, r.c_est, r.upper.unwrap());
    }
    Ok(())
}
