//! Monte Carlo rate of the dagger source at d = 0.05 against C_est.
//!
//! Run with `--release`; the default budget simulates 10^7 output bits.

use deletion_capacity::constants::{capacity_estimate, default_constants};
use deletion_capacity::estimation::{estimate_rate, RateConfig};
use deletion_capacity::sources::{dagger_distribution, SourceSpec};

fn main() -> deletion_capacity::error::Result<()> {
    let d = 0.05;
    let spec = SourceSpec::Renewal(dagger_distribution(d, 64)?);
    let est = estimate_rate(&spec, d, &RateConfig::default())?;
    println!("{}", est.to_json()?);
    println!("C_est({d}) = {:.5}", capacity_estimate(d, default_constants())?);
    Ok(())
}
