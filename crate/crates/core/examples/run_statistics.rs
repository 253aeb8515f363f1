//! Empirical run, k-block and super-run statistics of a sampled path.

use deletion_capacity::runstats::{empirical_run_distribution, empirical_super_run_distribution};
use deletion_capacity::sources::{geometric_half, sample_sequence, SourceSpec};

fn main() -> deletion_capacity::error::Result<()> {
    let x = sample_sequence(&SourceSpec::BernoulliHalf, 200_000, 3, false)?;
    let stats = empirical_run_distribution(&x, 2, 64)?;
    let geo = geometric_half(64)?;
    println!("{} interior runs, mean {:.4}", stats.n_runs, stats.mu_hat);
    println!("max gap to 2^-l over l <= 8: {:.4}", stats.max_pmf_gap(&geo, 8));
    if let Some(pairs) = &stats.kblock_pmf {
        let p11 = pairs.get(&vec![1, 1]).copied().unwrap_or(0.0);
        println!("P(L1 = 1, L2 = 1) = {p11:.4} (independent runs give 0.25)");
    }

    let sr = empirical_super_run_distribution(&x)?;
    println!("mean super-run length {:.4}", sr.mu_tilde_hat.unwrap_or(f64::NAN));
    println!("{}", serde_json::to_string(&stats.export())?);
    Ok(())
}
