//! Embedding counts, likelihoods and the exact small-block information rate.

use deletion_capacity::likelihood::{embedding_count_exact, enumerate_embeddings, exact_block_information, log_likelihood};
use deletion_capacity::sources::{BinarySequence, SourceSpec};

fn main() -> deletion_capacity::error::Result<()> {
    let x: BinarySequence = "0110100".parse()?;
    let y: BinarySequence = "010".parse()?;
    let count = embedding_count_exact(&x, &y)?;
    assert_eq!(count, enumerate_embeddings(&x, &y)?);
    println!("#{y} in {x} = {count}");
    if let Some(ll) = log_likelihood(&x, &y, 0.3)? {
        println!("p(y|x) at d = 0.3: {:.6}", ll.prob());
    }

    for n in [4, 8, 12] {
        let b = exact_block_information(&SourceSpec::BernoulliHalf, n, 0.1)?;
        println!("n = {n:2}: H(Y) = {:.4}  H(Y|X) = {:.4}  I/n = {:.5}", b.h_y, b.h_y_given_x, b.info_per_bit);
    }
    Ok(())
}
