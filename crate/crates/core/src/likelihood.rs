//! Exact deletion-channel likelihoods.
//!
//! `p(y | x) = N(x, y) d^(n-m) (1-d)^m`, where `N(x, y)` counts the ways to
//! delete `n - m` bits of `x` and obtain `y`. `N` comes from the usual
//! subsequence-embedding recursion
//! `N[i][j] = N[i-1][j] + [x_i = y_j] N[i-1][j-1]`, kept as one row updated
//! in place and restricted to the band `i - (n - m) <= j <= i`.

use serde::Serialize;

use crate::error::{check_probability, domain, Error, Result};
use crate::numeric::csum;
use crate::sources::{BinarySequence, SourceSpec};

/// Inputs up to this length use exact integer counts.
pub const EXACT_COUNT_MAX_N: usize = 64;

/// Longest block [`exact_block_information`] will enumerate.
pub const MAX_EXACT_N: usize = 12;

/// Rescaling threshold for the floating-point DP.
const SCALE_EXP: i32 = 512;

/// `log2 p(y | x)` together with `log2 N(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogLikelihood {
    pub log_embedding_count: f64,
    pub log_prob: f64,
}

impl LogLikelihood {
    pub fn prob(&self) -> f64 {
        self.log_prob.exp2()
    }
}

fn check_shapes(x: &[u8], y: &[u8]) -> Result<()> {
    if y.len() > x.len() {
        return Err(domain(format!(
            "output length {} exceeds input length {}",
            y.len(),
            x.len()
        )));
    }
    Ok(())
}

/// Exact embedding count. Works for inputs up to 127 bits, where every count
/// fits in a `u128`; zero means `y` is not a subsequence of `x`.
pub fn embedding_count_exact(x: &BinarySequence, y: &BinarySequence) -> Result<u128> {
    if x.len() > 127 {
        return Err(Error::TooLarge { n: x.len(), max: 127 });
    }
    check_shapes(x.bits(), y.bits())?;
    Ok(count_exact(x.bits(), y.bits()))
}

fn count_exact(x: &[u8], y: &[u8]) -> u128 {
    let (n, m) = (x.len(), y.len());
    let del = n - m;
    let mut row = vec![0u128; m + 1];
    row[0] = 1;
    for i in 1..=n {
        let lo = i.saturating_sub(del).max(1);
        for j in (lo..=i.min(m)).rev() {
            if x[i - 1] == y[j - 1] {
                row[j] += row[j - 1];
            }
        }
    }
    row[m]
}

/// Longest input [`enumerate_embeddings`] accepts.
pub const MAX_ENUMERATION_N: usize = 24;

/// Counts embeddings by trying every deletion mask. Exponential; an oracle for the DP.
pub fn enumerate_embeddings(x: &BinarySequence, y: &BinarySequence) -> Result<u128> {
    let n = x.len();
    if n > MAX_ENUMERATION_N {
        return Err(Error::TooLarge { n, max: MAX_ENUMERATION_N });
    }
    check_shapes(x.bits(), y.bits())?;
    let (xb, yb) = (x.bits(), y.bits());
    let del = (n - yb.len()) as u32;
    let hits = (0u32..1 << n)
        .filter(|mask| mask.count_ones() == del)
        .filter(|mask| {
            let mut kept = (0..n).filter(|i| (mask >> i) & 1 == 0).map(|i| xb[i]);
            yb.iter().all(|&b| kept.next() == Some(b))
        })
        .count();
    Ok(hits as u128)
}

/// `sum_y p(y | x)` over every output reachable from `x`, each term from
/// the DP. Equals one up to rounding; a normalization oracle.
pub fn total_output_probability(x: &BinarySequence, d: f64) -> Result<f64> {
    check_probability("d", d)?;
    let n = x.len();
    if n > MAX_ENUMERATION_N {
        return Err(Error::TooLarge { n, max: MAX_ENUMERATION_N });
    }
    let outputs: std::collections::BTreeSet<Vec<u8>> = (0u32..1 << n)
        .map(|mask| (0..n).filter(|i| (mask >> i) & 1 == 0).map(|i| x.bits()[i]).collect())
        .collect();
    Ok(csum(
        outputs
            .iter()
            .filter_map(|y| log_likelihood_bits(x.bits(), y, d))
            .map(|l| l.prob()),
    ))
}

/// `log2 N(x, y)` from the floating-point DP; `None` when `N = 0`.
///
/// The band is rescaled by a power of two whenever its maximum passes
/// `2^512`. Band entries more than about `2^1500` below the row maximum
/// flush to zero, which only matters for inputs far longer than the ones
/// the estimators use.
pub fn embedding_count_scaled(x: &BinarySequence, y: &BinarySequence) -> Result<Option<f64>> {
    check_shapes(x.bits(), y.bits())?;
    Ok(log2_count_scaled(x.bits(), y.bits()))
}

pub(crate) fn log2_count_scaled(x: &[u8], y: &[u8]) -> Option<f64> {
    let (n, m) = (x.len(), y.len());
    let del = n - m;
    let mut row = vec![0f64; m + 1];
    row[0] = 1.0;
    let mut log_scale = 0f64;
    let threshold = 2f64.powi(SCALE_EXP);
    let shrink = 2f64.powi(-SCALE_EXP);
    for i in 1..=n {
        let hi = i.min(m);
        let lo = i.saturating_sub(del).max(1);
        let xi = x[i - 1];
        let mut max = 0f64;
        for j in (lo..=hi).rev() {
            if xi == y[j - 1] {
                row[j] += row[j - 1];
            }
            max = max.max(row[j]);
        }
        if max > threshold {
            // Every entry read by the next row lies in this row's band.
            for v in &mut row[lo - 1..=hi] {
                *v *= shrink;
            }
            log_scale += f64::from(SCALE_EXP);
        }
    }
    (row[m] > 0.0).then(|| row[m].log2() + log_scale)
}

/// `log2 N(x, y)`, exact for `n <= 64`; `None` when `y` cannot be produced.
pub fn embedding_count(x: &BinarySequence, y: &BinarySequence) -> Result<Option<f64>> {
    check_shapes(x.bits(), y.bits())?;
    Ok(log2_count(x.bits(), y.bits()))
}

fn log2_count(x: &[u8], y: &[u8]) -> Option<f64> {
    if x.len() <= EXACT_COUNT_MAX_N {
        let c = count_exact(x, y);
        (c > 0).then(|| (c as f64).log2())
    } else {
        log2_count_scaled(x, y)
    }
}

/// `log2 p(y | x)` for the deletion channel; `None` when `p(y | x) = 0`.
pub fn log_likelihood(x: &BinarySequence, y: &BinarySequence, d: f64) -> Result<Option<LogLikelihood>> {
    check_probability("d", d)?;
    check_shapes(x.bits(), y.bits())?;
    Ok(log_likelihood_bits(x.bits(), y.bits(), d))
}

pub(crate) fn log_likelihood_bits(x: &[u8], y: &[u8], d: f64) -> Option<LogLikelihood> {
    let (n, m) = (x.len(), y.len());
    let del = n - m;
    if (d == 0.0 && del > 0) || (d == 1.0 && m > 0) {
        return None;
    }
    let log_count = log2_count(x, y)?;
    let mut log_prob = log_count;
    if del > 0 {
        log_prob += del as f64 * d.log2();
    }
    if m > 0 {
        log_prob += m as f64 * (1.0 - d).log2();
    }
    Some(LogLikelihood {
        log_embedding_count: log_count,
        log_prob: log_prob.min(0.0),
    })
}

/// Exhaustive block entropies of a source observed through the channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlockInformation {
    pub n: usize,
    pub d: f64,
    /// `H(X^n)` in bits.
    pub h_x: f64,
    /// `H(Y)` in bits.
    pub h_y: f64,
    /// `H(Y | X^n)` in bits.
    pub h_y_given_x: f64,
    /// `I(X^n; Y) / n` in bits per input bit.
    pub info_per_bit: f64,
}

/// Probability of the `n`-bit word `x` (bit `i` of `word` is `x_i`) under
/// the stationary law of `spec`.
pub fn block_probability(spec: &SourceSpec, word: u32, n: usize) -> f64 {
    let bit = |i: usize| (word >> i) & 1;
    match spec {
        SourceSpec::BernoulliHalf => (-(n as f64)).exp2(),
        SourceSpec::Markov { p_same } => {
            (1..n).fold(0.5, |acc, i| acc * if bit(i) == bit(i - 1) { *p_same } else { 1.0 - p_same })
        }
        SourceSpec::Renewal(dist) => {
            let mut runs: Vec<usize> = Vec::new();
            for i in 0..n {
                if i > 0 && bit(i) == bit(i - 1) {
                    *runs.last_mut().unwrap() += 1;
                } else {
                    runs.push(1);
                }
            }
            let mu = dist.mean();
            // The run covering position 1 has residual length r with P = P(L >= r) / mu.
            if runs.len() == 1 {
                let tail = csum((n..=dist.l_max()).map(|r| dist.survival(r)));
                return 0.5 * tail / mu;
            }
            let first = dist.survival(runs[0]) / mu;
            let interior: f64 = runs[1..runs.len() - 1].iter().map(|&r| dist.prob(r)).product();
            0.5 * first * interior * dist.survival(*runs.last().unwrap())
        }
    }
}

/// `H(Y)`, `H(Y | X^n)` and `I(X^n; Y)/n` by enumerating every input block
/// and every deletion pattern. Renewal sources use their stationary law.
pub fn exact_block_information(spec: &SourceSpec, n: usize, d: f64) -> Result<BlockInformation> {
    check_probability("d", d)?;
    if n > MAX_EXACT_N {
        return Err(Error::TooLarge { n, max: MAX_EXACT_N });
    }
    if n == 0 {
        return Ok(BlockInformation {
            n,
            d,
            h_x: 0.0,
            h_y: 0.0,
            h_y_given_x: 0.0,
            info_per_bit: 0.0,
        });
    }
    // Outputs are indexed by `(1 << m) | y`, so every length gets its own slot.
    let slots = 1usize << (n + 1);
    let mask_weight: Vec<f64> = (0..=n).map(|k| d.powi(k as i32) * (1.0 - d).powi((n - k) as i32)).collect();
    let mut p_y = vec![0f64; slots];
    let mut p_y_x = vec![0f64; slots];
    let mut h_x = 0f64;
    let mut h_y_given_x = 0f64;
    for word in 0..(1u32 << n) {
        let px = block_probability(spec, word, n);
        if px <= 0.0 {
            continue;
        }
        h_x -= px * px.log2();
        p_y_x.fill(0.0);
        for mask in 0..(1u32 << n) {
            let (mut y, mut m) = (0usize, 0usize);
            for i in 0..n {
                if (mask >> i) & 1 == 0 {
                    y |= (((word >> i) & 1) as usize) << m;
                    m += 1;
                }
            }
            p_y_x[(1 << m) | y] += mask_weight[n - m];
        }
        let mut h = 0f64;
        for (slot, &p) in p_y_x.iter().enumerate() {
            if p > 0.0 {
                h -= p * p.log2();
                p_y[slot] += px * p;
            }
        }
        h_y_given_x += px * h;
    }
    let h_y = -csum(p_y.iter().filter(|&&p| p > 0.0).map(|&p| p * p.log2()));
    Ok(BlockInformation {
        n,
        d,
        h_x,
        h_y,
        h_y_given_x,
        info_per_bit: (h_y - h_y_given_x) / n as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::binary_entropy;
    use crate::sources::{dagger_distribution, geometric_half};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn seq(s: &str) -> BinarySequence {
        s.parse().unwrap()
    }

    fn brute_force(x: &[u8], y: &[u8]) -> u128 {
        let x = BinarySequence::new(x.to_vec()).unwrap();
        let y = BinarySequence::new(y.to_vec()).unwrap();
        enumerate_embeddings(&x, &y).unwrap()
    }

    fn word(v: u32, len: usize) -> Vec<u8> {
        (0..len).map(|i| ((v >> i) & 1) as u8).collect()
    }

    #[test]
    fn count_examples() {
        assert_eq!(embedding_count(&seq("11"), &seq("1")).unwrap(), Some(1.0));
        assert_abs_diff_eq!(embedding_count(&seq("0101"), &seq("01")).unwrap().unwrap(), 3f64.log2());
        assert_eq!(embedding_count(&seq("0110"), &seq("0110")).unwrap(), Some(0.0));
        assert_eq!(embedding_count(&seq("000"), &seq("1")).unwrap(), None);
        assert!(embedding_count(&seq("0"), &seq("00")).is_err());
    }

    #[test]
    fn dp_matches_enumeration_exhaustively_to_six() {
        for n in 0..=6 {
            for xv in 0u32..1 << n {
                let x = word(xv, n);
                for m in 0..=n {
                    for yv in 0u32..1 << m {
                        let y = word(yv, m);
                        assert_eq!(count_exact(&x, &y), brute_force(&x, &y));
                    }
                }
            }
        }
    }

    #[test]
    fn likelihood_examples() {
        let l = log_likelihood(&seq("01"), &seq("0"), 0.5).unwrap().unwrap();
        assert_abs_diff_eq!(l.prob(), 0.25, epsilon = 1e-15);
        let l = log_likelihood(&seq("0110"), &seq(""), 0.3).unwrap().unwrap();
        assert_abs_diff_eq!(l.prob(), 0.3f64.powi(4), epsilon = 1e-15);
        assert!(log_likelihood(&seq("000"), &seq("1"), 0.3).unwrap().is_none());
        assert_eq!(log_likelihood(&seq("01"), &seq("01"), 0.0).unwrap().unwrap().log_prob, 0.0);
        assert!(log_likelihood(&seq("01"), &seq("0"), 0.0).unwrap().is_none());
        assert!(log_likelihood(&seq("01"), &seq("0"), 1.0).unwrap().is_none());
    }

    #[test]
    fn likelihoods_sum_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in 4..=12 {
            for d in [0.1, 0.5, 0.9] {
                for _ in 0..10 {
                    let x: Vec<u8> = (0..n).map(|_| rng.gen_range(0..2)).collect();
                    let mut total = Vec::new();
                    for m in 0..=n {
                        for yv in 0u32..1 << m {
                            if let Some(l) = log_likelihood_bits(&x, &word(yv, m), d) {
                                total.push(l.prob());
                            }
                        }
                    }
                    assert_abs_diff_eq!(csum(total), 1.0, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn scaled_handles_long_inputs() {
        // All-zero strings: N = C(n, m) exactly.
        let n = 3000;
        let m = 2000;
        let x = BinarySequence::new(vec![0; n]).unwrap();
        let y = BinarySequence::new(vec![0; m]).unwrap();
        let got = embedding_count_scaled(&x, &y).unwrap().unwrap();
        let lgamma = |k: usize| csum((1..=k).map(|i| (i as f64).log2()));
        let want = lgamma(n) - lgamma(m) - lgamma(n - m);
        assert!((got - want).abs() < 1e-9 * want, "{got} vs {want}");
    }

    #[test]
    fn one_bit_block() {
        for d in [0.0, 0.1, 0.5, 1.0] {
            let b = exact_block_information(&SourceSpec::BernoulliHalf, 1, d).unwrap();
            let h = binary_entropy(d).unwrap();
            assert_abs_diff_eq!(b.h_y, h + 1.0 - d, epsilon = 1e-12);
            assert_abs_diff_eq!(b.h_y_given_x, h, epsilon = 1e-12);
            assert_abs_diff_eq!(b.info_per_bit, 1.0 - d, epsilon = 1e-12);
        }
    }

    #[test]
    fn perfect_channel_gives_source_entropy() {
        let spec = SourceSpec::Renewal(dagger_distribution(0.1, 64).unwrap());
        let b = exact_block_information(&spec, 8, 0.0).unwrap();
        assert_abs_diff_eq!(b.info_per_bit, b.h_x / 8.0, epsilon = 1e-12);
        assert!(exact_block_information(&spec, 13, 0.1).is_err());
    }

    #[test]
    fn block_laws_are_normalized() {
        let specs = [
            SourceSpec::BernoulliHalf,
            SourceSpec::markov(0.7).unwrap(),
            SourceSpec::Renewal(dagger_distribution(0.2, 64).unwrap()),
        ];
        for spec in &specs {
            for n in 1..=10 {
                let total = csum((0u32..1 << n).map(|w| block_probability(spec, w, n)));
                assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
            }
        }
        let geo = SourceSpec::Renewal(geometric_half(64).unwrap());
        for w in 0u32..1 << 6 {
            assert_abs_diff_eq!(block_probability(&geo, w, 6), 1.0 / 64.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn bernoulli_n8_regression_pin() {
        let b = exact_block_information(&SourceSpec::BernoulliHalf, 8, 0.1).unwrap();
        assert_abs_diff_eq!(b.h_x, 8.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b.info_per_bit, BERNOULLI_N8_D01, epsilon = 1e-12);
    }

    // Cross-checked against an independent dictionary-based enumeration.
    const BERNOULLI_N8_D01: f64 = 0.741_595_469_695_32;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn dp_matches_enumeration_random(xv in any::<u32>(), yv in any::<u32>(), n in 1usize..=12, m_frac in 0.0f64..=1.0) {
            let m = ((n as f64) * m_frac).round() as usize;
            let x = word(xv, n);
            let y = word(yv, m);
            prop_assert_eq!(count_exact(&x, &y), brute_force(&x, &y));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn scaled_matches_exact(bits in proptest::collection::vec(0u8..2, 1..=64), keep in proptest::collection::vec(proptest::bool::weighted(0.8), 64)) {
            let y: Vec<u8> = bits.iter().zip(&keep).filter(|(_, &k)| k).map(|(&b, _)| b).collect();
            let exact = count_exact(&bits, &y) as f64;
            let scaled = log2_count_scaled(&bits, &y).unwrap().exp2();
            prop_assert!((scaled - exact).abs() <= 1e-10 * exact);
        }
    }
}
