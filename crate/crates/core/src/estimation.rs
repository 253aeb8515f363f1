//! Monte Carlo estimates of the information rate `I = h_out - h_cond`.
//!
//! * `h_cond` is the mean of `-log2 p(Y | X) / n` over independent blocks,
//!   with `p(y | x)` from the exact embedding DP.
//! * `h_out` uses the fact that a renewal input yields a renewal output, so
//!   the output entropy rate is `(1 - d) H(q) / mu(q)` for the output
//!   run-length pmf `q`, estimated by plug-in from one long simulated output.
//!
//! Replica `i` draws its input from stream `(seed, Source, i)` and its
//! deletions from `(seed, Channel, i)`; output segment `s` uses
//! `(seed, OutputSegment, s)`. Reductions run in index order, so results do
//! not depend on the thread count.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{runs_of, transmit_with_rng, DeletionRealization};
use crate::error::{check_probability, domain, Error, Result};
use crate::likelihood::log_likelihood_bits;
use crate::numeric::{binomial_entropy, csum, mean_and_stderr};
use crate::rng::{stream, Purpose};
use crate::runstats::{distribution_stats, RunLengthCounter};
use crate::sources::{sample_with_rng, BinarySequence, RunLengthDistribution, Sampler, SourceSpec};

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 0x00de_1e7e;

/// Output bits simulated per independent segment.
pub const SEGMENT_BITS: usize = 1 << 18;

/// Output runs dropped at each end of a segment.
pub const BURN_IN_RUNS: usize = 64;

/// Contiguous groups for the delete-one-group jackknife.
pub const JACKKNIFE_GROUPS: usize = 32;

/// Plug-in entropy needs this many runs of every length up to [`POWER_CHECK_MAX_L`].
pub const MIN_RUNS_PER_LENGTH: u64 = 100;
pub const POWER_CHECK_MAX_L: usize = 8;

/// Tabulation cap for output runs; longer runs share one overflow symbol.
const OUTPUT_L_CAP: usize = 4096;

/// A Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub std_err: f64,
}

impl Estimate {
    fn exact(value: f64) -> Self {
        Self { value, std_err: 0.0 }
    }
}

/// How the output term was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RateMode {
    /// Renewal input: `H(q)/mu(q)` is the output entropy rate itself.
    #[serde(rename = "exact-renewal")]
    ExactRenewal,
    /// Other inputs: `H(q)/mu(q)` only bounds the output entropy rate from above.
    #[serde(rename = "upper-bound")]
    UpperBound,
}

/// A rate estimate in bits per input bit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateEstimate {
    pub rate: f64,
    pub h_out: f64,
    pub h_cond: f64,
    pub std_err: f64,
    pub n: usize,
    pub samples: usize,
    pub d: f64,
    pub seed: u64,
    pub mode: RateMode,
    /// `H(Binomial(n, 1 - d)) / n`, included in `h_out` for finite-block runs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub length_term: Option<f64>,
    #[serde(skip)]
    pub h_out_std_err: f64,
    #[serde(skip)]
    pub h_cond_std_err: f64,
}

impl RateEstimate {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

/// Knobs for [`estimate_rate`].
#[derive(Debug, Clone, PartialEq)]
pub struct RateConfig {
    /// Block length for the conditional term.
    pub n: usize,
    /// Number of blocks for the conditional term.
    pub samples: usize,
    /// Output bits simulated for the output term.
    pub out_bits: usize,
    /// Worker threads; 0 lets rayon decide.
    pub threads: usize,
    pub seed: u64,
    pub miller_madow: bool,
    /// Accept non-renewal sources and report an upper-bound estimate.
    pub allow_upper_bound: bool,
    /// Estimate `I(X^n; Y)/n` at the block length `n` instead of the limit,
    /// by adding the output-length entropy. Exact for Bernoulli input.
    pub finite_block: bool,
}

impl Default for RateConfig {
    fn default() -> Self {
        Self {
            n: 2000,
            samples: 500,
            out_bits: 10_000_000,
            threads: 0,
            seed: DEFAULT_SEED,
            miller_madow: false,
            allow_upper_bound: false,
            finite_block: false,
        }
    }
}

/// Mean and standard error of `-log2 p(Y | X) / n` over `samples` blocks.
pub fn estimate_h_cond(spec: &SourceSpec, d: f64, n: usize, samples: usize, seed: u64) -> Result<Estimate> {
    check_probability("d", d)?;
    if samples < 2 {
        return Err(domain("need at least 2 samples"));
    }
    if n == 0 {
        return Err(domain("block length must be positive"));
    }
    // A perfect or fully erasing channel leaves no doubt about Y given X.
    if d == 0.0 || d == 1.0 {
        return Ok(Estimate::exact(0.0));
    }
    let sampler = Sampler::new(spec)?;
    let values: Vec<f64> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut src = stream(seed, Purpose::Source, i);
            let mut bits = Vec::with_capacity(n);
            sampler.fill(n, false, &mut src, &mut bits);
            let x = BinarySequence::from_bits_unchecked(bits);
            let mut ch = stream(seed, Purpose::Channel, i);
            let r = transmit_with_rng(&x, d, &mut ch).expect("d checked above");
            let ll = log_likelihood_bits(r.x.bits(), r.y.bits(), d).expect("sampled outputs are possible");
            -ll.log_prob / n as f64
        })
        .collect();
    let (value, std_err) = mean_and_stderr(&values);
    Ok(Estimate { value, std_err })
}

fn segment_count(out_bits: usize) -> usize {
    out_bits.div_ceil(SEGMENT_BITS)
}

/// Interior output run lengths from `ceil(out_bits / 2^18)` independent
/// segments, concatenated in segment order. Each segment drops its first and
/// last 64 runs.
pub fn simulate_output_runs(spec: &SourceSpec, d: f64, out_bits: usize, seed: u64) -> Result<Vec<u32>> {
    check_probability("d", d)?;
    if d >= 1.0 {
        return Err(domain("no output to simulate at d = 1"));
    }
    let sampler = Sampler::new(spec)?;
    let segments: Vec<Vec<u32>> = (0..segment_count(out_bits))
        .into_par_iter()
        .map(|s| {
            let want = SEGMENT_BITS.min(out_bits - s * SEGMENT_BITS);
            let n_in = (want as f64 / (1.0 - d)).ceil() as usize;
            let mut rng = stream(seed, Purpose::OutputSegment, s as u64);
            let mut x = Vec::with_capacity(n_in);
            sampler.fill(n_in, false, &mut rng, &mut x);
            let y: Vec<u8> = x.into_iter().filter(|_| !rng.gen_bool(d)).collect();
            let runs = runs_of(&y);
            if runs.len() <= 2 * BURN_IN_RUNS {
                return Vec::new();
            }
            runs[BURN_IN_RUNS..runs.len() - BURN_IN_RUNS].iter().map(|r| r.len as u32).collect()
        })
        .collect();
    Ok(segments.concat())
}

/// Plug-in output run-length pmf from a simulated output.
pub fn output_run_distribution(spec: &SourceSpec, d: f64, out_bits: usize, seed: u64) -> Result<RunLengthDistribution> {
    let runs = simulate_output_runs(spec, d, out_bits, seed)?;
    let mut counter = RunLengthCounter::new(OUTPUT_L_CAP);
    runs.iter().for_each(|&l| counter.push(l as usize));
    if counter.n_runs() == 0 {
        return Err(Error::Underpowered("no interior output runs".into()));
    }
    counter.to_distribution()
}

fn markov_refusal() -> Error {
    Error::UnsupportedSource(
        "Markov output is not known to be renewal; use estimate_rate with allow_upper_bound for an upper-bound estimate"
            .into(),
    )
}

/// `(1 - d) H(q) / mu(q)` for a renewal or Bernoulli input, with a
/// delete-one-group jackknife standard error.
pub fn estimate_h_out_renewal(
    spec: &SourceSpec,
    d: f64,
    out_bits: usize,
    seed: u64,
    miller_madow: bool,
) -> Result<Estimate> {
    if let SourceSpec::Markov { .. } = spec {
        return Err(markov_refusal());
    }
    h_out_from_runs(spec, d, out_bits, seed, miller_madow)
}

fn h_out_from_runs(spec: &SourceSpec, d: f64, out_bits: usize, seed: u64, miller_madow: bool) -> Result<Estimate> {
    check_probability("d", d)?;
    if d == 1.0 {
        return Ok(Estimate::exact(0.0));
    }
    if d == 0.0 {
        match spec {
            SourceSpec::BernoulliHalf => return Ok(Estimate::exact(1.0)),
            SourceSpec::Renewal(p) => return Ok(Estimate::exact(distribution_stats(p).renewal_entropy_rate)),
            SourceSpec::Markov { .. } => {}
        }
    }
    let runs = simulate_output_runs(spec, d, out_bits, seed)?;
    let groups: Vec<RunLengthCounter> = runs
        .chunks(runs.len().div_ceil(JACKKNIFE_GROUPS).max(1))
        .map(|chunk| {
            let mut c = RunLengthCounter::new(OUTPUT_L_CAP);
            chunk.iter().for_each(|&l| c.push(l as usize));
            c
        })
        .collect();
    let mut total = RunLengthCounter::new(OUTPUT_L_CAP);
    groups.iter().for_each(|g| total.merge(g));
    if let Some(l) = (1..=POWER_CHECK_MAX_L).find(|&l| total.count(l) < MIN_RUNS_PER_LENGTH) {
        return Err(Error::Underpowered(format!(
            "{} output runs of length {l} (need {MIN_RUNS_PER_LENGTH}); raise out_bits above {out_bits}",
            total.count(l)
        )));
    }
    let theta = |c: &RunLengthCounter| (1.0 - d) * c.entropy(miller_madow) / c.mean();
    let value = theta(&total);
    let g = groups.len() as f64;
    let leave_out: Vec<f64> = groups
        .iter()
        .map(|grp| {
            let mut rest = total.clone();
            rest.subtract(grp);
            theta(&rest)
        })
        .collect();
    let mean = csum(leave_out.iter().copied()) / g;
    let var = (g - 1.0) / g * csum(leave_out.iter().map(|t| (t - mean) * (t - mean)));
    Ok(Estimate {
        value,
        std_err: var.sqrt(),
    })
}

/// `I = h_out - h_cond` with a combined standard error.
pub fn estimate_rate(spec: &SourceSpec, d: f64, cfg: &RateConfig) -> Result<RateEstimate> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| domain(format!("cannot start {} worker threads: {e}", cfg.threads)))?;
    pool.install(|| estimate_rate_inner(spec, d, cfg))
}

fn estimate_rate_inner(spec: &SourceSpec, d: f64, cfg: &RateConfig) -> Result<RateEstimate> {
    let mode = match spec {
        SourceSpec::Markov { .. } if cfg.allow_upper_bound => RateMode::UpperBound,
        SourceSpec::Markov { .. } => return Err(markov_refusal()),
        _ => RateMode::ExactRenewal,
    };
    let out = h_out_from_runs(spec, d, cfg.out_bits, cfg.seed, cfg.miller_madow)?;
    let cond = estimate_h_cond(spec, d, cfg.n, cfg.samples, cfg.seed)?;
    let length_term = cfg.finite_block.then(|| binomial_entropy(cfg.n, 1.0 - d) / cfg.n as f64);
    let h_out = out.value + length_term.unwrap_or(0.0);
    Ok(RateEstimate {
        rate: h_out - cond.value,
        h_out,
        h_cond: cond.value,
        std_err: out.std_err.hypot(cond.std_err),
        n: cfg.n,
        samples: cfg.samples,
        d,
        seed: cfg.seed,
        mode,
        length_term,
        h_out_std_err: out.std_err,
        h_cond_std_err: cond.std_err,
    })
}

/// `h_cond(2n) - h_cond(n)` at equal total sampled bits (`samples / 2` blocks
/// at `2n`), used to check that `n` is large enough for the per-bit value.
pub fn n_doubling_drift(spec: &SourceSpec, d: f64, n: usize, samples: usize, seed: u64) -> Result<Estimate> {
    if samples < 4 {
        return Err(domain("need at least 4 samples to halve them"));
    }
    let short = estimate_h_cond(spec, d, n, samples, seed)?;
    let long = estimate_h_cond(spec, d, 2 * n, samples / 2, seed.wrapping_add(1))?;
    Ok(Estimate {
        value: long.value - short.value,
        std_err: long.std_err.hypot(short.std_err),
    })
}

/// One sampled block pushed through the channel, for callers that want to
/// inspect individual replicas.
pub fn sample_replica(spec: &SourceSpec, d: f64, n: usize, seed: u64, index: u64) -> Result<DeletionRealization> {
    let x = sample_with_rng(spec, n, false, &mut stream(seed, Purpose::Source, index))?;
    transmit_with_rng(&x, d, &mut stream(seed, Purpose::Channel, index))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::binary_entropy;
    use crate::likelihood::{exact_block_information, log_likelihood};
    use crate::sources::{dagger_distribution, geometric_half};

    #[test]
    fn h_cond_edges() {
        let spec = SourceSpec::BernoulliHalf;
        assert_eq!(estimate_h_cond(&spec, 0.0, 100, 4, 1).unwrap().value, 0.0);
        assert_eq!(estimate_h_cond(&spec, 1.0, 100, 4, 1).unwrap().value, 0.0);
        assert!(estimate_h_cond(&spec, 0.1, 100, 1, 1).is_err());
        let small = estimate_h_cond(&spec, 1e-4, 200, 50, 1).unwrap();
        assert!(small.value < 0.01);
    }

    #[test]
    fn h_cond_matches_replica_likelihood() {
        let spec = SourceSpec::BernoulliHalf;
        let e = estimate_h_cond(&spec, 0.2, 50, 3, 9).unwrap();
        let direct: Vec<f64> = (0..3)
            .map(|i| {
                let r = sample_replica(&spec, 0.2, 50, 9, i).unwrap();
                -log_likelihood(&r.x, &r.y, 0.2).unwrap().unwrap().log_prob / 50.0
            })
            .collect();
        assert_eq!(e.value, mean_and_stderr(&direct).0);
    }

    #[test]
    fn h_cond_below_binary_entropy() {
        let e = estimate_h_cond(&SourceSpec::BernoulliHalf, 0.1, 2000, 40, 3).unwrap();
        assert!(e.value <= binary_entropy(0.1).unwrap());
    }

    #[test]
    fn h_cond_small_block_oracle() {
        let spec = SourceSpec::BernoulliHalf;
        let exact = exact_block_information(&spec, 8, 0.1).unwrap();
        let e = estimate_h_cond(&spec, 0.1, 8, 20_000, 5).unwrap();
        assert!((e.value - exact.h_y_given_x / 8.0).abs() <= 4.0 * e.std_err);
    }

    #[test]
    fn h_out_bernoulli_and_identity() {
        let e = estimate_h_out_renewal(&SourceSpec::BernoulliHalf, 0.1, 1 << 21, 2, false).unwrap();
        assert!((e.value - 0.9).abs() <= 3.0 * e.std_err, "{e:?}");
        assert!(e.std_err > 0.0);
        let d0 = estimate_h_out_renewal(&SourceSpec::BernoulliHalf, 0.0, 1000, 2, false).unwrap();
        assert_eq!(d0.value, 1.0);
        let dagger = dagger_distribution(0.1, 64).unwrap();
        let want = distribution_stats(&dagger).renewal_entropy_rate;
        let got = estimate_h_out_renewal(&SourceSpec::Renewal(dagger), 0.0, 1000, 2, false).unwrap();
        assert_eq!(got.value, want);
    }

    #[test]
    fn h_out_is_one_minus_divergence_rate() {
        let d = 0.1;
        let spec = SourceSpec::Renewal(dagger_distribution(d, 64).unwrap());
        let e = estimate_h_out_renewal(&spec, d, 1 << 21, 4, false).unwrap();
        let q = output_run_distribution(&spec, d, 1 << 21, 4).unwrap();
        let s = distribution_stats(&q);
        let route2 = (1.0 - d) * (1.0 - s.d_vs_geometric / q.mean());
        assert!((e.value - route2).abs() <= 3.0 * e.std_err);
    }

    #[test]
    fn refusals() {
        let markov = SourceSpec::markov(0.6).unwrap();
        assert!(matches!(
            estimate_h_out_renewal(&markov, 0.1, 1 << 20, 1, false),
            Err(Error::UnsupportedSource(_))
        ));
        let cfg = RateConfig {
            n: 200,
            samples: 4,
            out_bits: 1 << 18,
            ..RateConfig::default()
        };
        assert!(estimate_rate(&markov, 0.1, &cfg).is_err());
        let ub = estimate_rate(&markov, 0.1, &RateConfig { allow_upper_bound: true, ..cfg.clone() }).unwrap();
        assert_eq!(ub.mode, RateMode::UpperBound);
        assert!(ub.to_json().unwrap().contains("\"mode\":\"upper-bound\""));
        assert!(matches!(
            estimate_h_out_renewal(&SourceSpec::BernoulliHalf, 0.1, 5000, 1, false),
            Err(Error::Underpowered(_))
        ));
    }

    #[test]
    fn rate_at_zero_deletion() {
        let cfg = RateConfig {
            n: 100,
            samples: 2,
            out_bits: 1000,
            ..RateConfig::default()
        };
        let r = estimate_rate(&SourceSpec::BernoulliHalf, 0.0, &cfg).unwrap();
        assert_eq!((r.rate, r.h_cond), (1.0, 0.0));
        let p = geometric_half(8).unwrap();
        let r = estimate_rate(&SourceSpec::Renewal(p.clone()), 0.0, &cfg).unwrap();
        assert_eq!(r.rate, distribution_stats(&p).renewal_entropy_rate);
        let json: serde_json::Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        let keys: Vec<&str> = json.as_object().unwrap().keys().map(String::as_str).collect();
        assert_eq!(keys.len(), 9, "{keys:?}");
        assert_eq!(json["mode"], "exact-renewal");
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let spec = SourceSpec::Renewal(dagger_distribution(0.1, 64).unwrap());
        let cfg = RateConfig {
            n: 300,
            samples: 16,
            out_bits: 1 << 19,
            ..RateConfig::default()
        };
        let a = estimate_rate(&spec, 0.1, &RateConfig { threads: 1, ..cfg.clone() }).unwrap();
        let b = estimate_rate(&spec, 0.1, &RateConfig { threads: 3, ..cfg }).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(16))]

        #[test]
        fn h_cond_is_seeded_and_bounded(seed in 0u64..1000, d in 0.01f64..0.5, n in 8usize..64) {
            let spec = SourceSpec::BernoulliHalf;
            let a = estimate_h_cond(&spec, d, n, 8, seed).unwrap();
            proptest::prop_assert_eq!(a, estimate_h_cond(&spec, d, n, 8, seed).unwrap());
            // -log2 p(y|x) / n never exceeds the cost of the least likely deletion pattern.
            let worst = -(d.log2().min((1.0 - d).log2()));
            proptest::prop_assert!(a.value >= 0.0 && a.value <= worst, "{:?}", a);
            proptest::prop_assert!(a.std_err >= 0.0);
        }
    }
}
