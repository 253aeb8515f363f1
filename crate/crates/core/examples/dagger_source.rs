//! The capacity-achieving run-length law next to the geometric one.

use deletion_capacity::runstats::distribution_stats;
use deletion_capacity::sources::{dagger_distribution, geometric_half, sample_sequence, SourceSpec};

fn main() -> deletion_capacity::error::Result<()> {
    let d = 0.05;
    let dagger = dagger_distribution(d, 64)?;
    let geo = geometric_half(64)?;
    println!(" l   p*(l)      p+(l)");
    for l in 1..=8 {
        println!("{l:2}   {:.6}   {:.6}", geo.prob(l), dagger.prob(l));
    }
    let s = distribution_stats(&dagger);
    println!("mean {:.5}  H_L {:.5}  D(p+||p*) {:.3e}  entropy rate {:.5}", s.mu, s.h_l, s.d_vs_geometric, s.renewal_entropy_rate);

    let x = sample_sequence(&SourceSpec::Renewal(dagger), 64, 7, false)?;
    println!("sample: {x}");
    Ok(())
}
