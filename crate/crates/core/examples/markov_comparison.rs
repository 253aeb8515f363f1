//! Markov and jigsaw rate bounds against C_est, plus an upper-bound simulation.

use deletion_capacity::analytics::{jigsaw_rate_bound, markov_rate_bound, optimal_markov_param};
use deletion_capacity::constants::{capacity_estimate, default_constants};
use deletion_capacity::estimation::{estimate_rate, RateConfig};
use deletion_capacity::sources::SourceSpec;

fn main() -> deletion_capacity::error::Result<()> {
    let c = default_constants();
    println!("    d    C_est    Markov   jigsaw   p_same");
    for d in [0.01, 0.02, 0.05, 0.1] {
        println!(
            "{d:5.2}  {:.5}  {:.5}  {:.5}  {:.5}",
            capacity_estimate(d, c)?,
            markov_rate_bound(d, c)?,
            jigsaw_rate_bound(d, c)?,
            optimal_markov_param(d, c)?
        );
    }

    let d = 0.05;
    let spec = SourceSpec::markov(optimal_markov_param(d, c)?)?;
    let cfg = RateConfig {
        samples: 100,
        out_bits: 2_000_000,
        allow_upper_bound: true,
        ..RateConfig::default()
    };
    let est = estimate_rate(&spec, d, &cfg)?;
    println!("simulated ({:?}): {:.4} +- {:.4}", est.mode, est.rate, est.std_err);
    Ok(())
}
