//! Binary sequences, run-length distributions and stationary binary sources.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::Serialize;

use crate::constants::default_constants;
use crate::error::{check_probability, domain, Error, Result};
use crate::numeric::{csum, llnl};
use crate::rng::{stream, Purpose};

/// Default truncation for run-length distributions.
pub const DEFAULT_L_MAX: usize = 64;

/// Tolerance on `sum p = 1` for a valid distribution.
const NORMALIZATION_TOL: f64 = 1e-12;

/// A finite string of bits.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct BinarySequence {
    bits: Vec<u8>,
}

impl BinarySequence {
    /// Wraps a vector of `0`/`1` values.
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if let Some(pos) = bits.iter().position(|&b| b > 1) {
            return Err(domain(format!("value {} at position {pos} is not a bit", bits[pos])));
        }
        Ok(Self { bits })
    }

    pub(crate) fn from_bits_unchecked(bits: Vec<u8>) -> Self {
        debug_assert!(bits.iter().all(|&b| b <= 1));
        Self { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn into_bits(self) -> Vec<u8> {
        self.bits
    }

    /// Number of ones.
    pub fn weight(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }
}

impl FromStr for BinarySequence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .enumerate()
            .map(|(i, c)| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(domain(format!("character {other:?} at position {i} is not a bit"))),
            })
            .collect::<Result<Vec<u8>>>()
            .map(|bits| Self { bits })
    }
}

impl fmt::Display for BinarySequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// A run-length pmf on `1..=l_max`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunLengthDistribution {
    probs: Vec<f64>,
    mean: f64,
    /// Mass removed by truncating to `l_max` before renormalization.
    discarded_mass: f64,
}

impl RunLengthDistribution {
    /// Builds a distribution from `probs[l - 1] = P(L = l)`; must already sum to one.
    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        validate_weights(&probs)?;
        let total = csum(probs.iter().copied());
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(domain(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Self::assemble(probs, 0.0))
    }

    /// Normalizes non-negative weights; `discarded_mass` records what the
    /// caller cut off beyond the support.
    pub fn from_weights(weights: Vec<f64>, discarded_mass: f64) -> Result<Self> {
        validate_weights(&weights)?;
        let total = csum(weights.iter().copied());
        if total <= 0.0 {
            return Err(domain("weights sum to zero"));
        }
        let probs = weights.into_iter().map(|w| w / total).collect();
        Ok(Self::assemble(probs, discarded_mass))
    }

    /// Unit mass at length `l`.
    pub fn point_mass(l: usize) -> Result<Self> {
        if l == 0 {
            return Err(domain("run lengths start at 1"));
        }
        let mut probs = vec![0.0; l];
        probs[l - 1] = 1.0;
        Ok(Self::assemble(probs, 0.0))
    }

    fn assemble(probs: Vec<f64>, discarded_mass: f64) -> Self {
        let mean = csum(probs.iter().enumerate().map(|(i, p)| (i + 1) as f64 * p));
        Self {
            probs,
            mean,
            discarded_mass,
        }
    }

    /// `P(L = l)`; zero outside the support.
    pub fn prob(&self, l: usize) -> f64 {
        if l == 0 {
            0.0
        } else {
            self.probs.get(l - 1).copied().unwrap_or(0.0)
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn l_max(&self) -> usize {
        self.probs.len()
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn discarded_mass(&self) -> f64 {
        self.discarded_mass
    }

    /// `(l, P(L = l))` pairs over the support.
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.probs.iter().enumerate().map(|(i, &p)| (i + 1, p))
    }

    /// `P(L >= l)`.
    pub fn survival(&self, l: usize) -> f64 {
        if l <= 1 {
            return 1.0;
        }
        csum(self.probs.iter().skip(l - 1).copied())
    }

    /// Reads the `l<TAB>prob` text format. Lines starting with `#` and blank
    /// lines are skipped. Totals within `1e-6` of one are renormalized.
    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let mut probs: Vec<f64> = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let parse_err = |msg: String| Error::Parse { line: line_no, msg };
            let (l, p) = trimmed
                .split_once('\t')
                .ok_or_else(|| parse_err("expected \"l<TAB>prob\"".into()))?;
            let l: usize = l.trim().parse().map_err(|e| parse_err(format!("bad length {l:?}: {e}")))?;
            let p: f64 = p.trim().parse().map_err(|e| parse_err(format!("bad probability {p:?}: {e}")))?;
            if l == 0 || l <= probs.len() {
                return Err(parse_err(format!("length {l} is not strictly increasing from 1")));
            }
            if !(p >= 0.0 && p.is_finite()) {
                return Err(parse_err(format!("probability {p} is not a non-negative number")));
            }
            probs.resize(l - 1, 0.0);
            probs.push(p);
        }
        if probs.is_empty() {
            return Err(Error::Parse {
                line: 0,
                msg: "no entries".into(),
            });
        }
        let total = csum(probs.iter().copied());
        if (total - 1.0).abs() > 1e-6 {
            return Err(domain(format!("probabilities sum to {total}, not 1")));
        }
        Self::from_weights(probs, 0.0)
    }

    /// Writes the `l<TAB>prob` text format with round-trip precision.
    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# run-length distribution, l_max = {}, mean = {}", self.l_max(), self.mean)?;
        if self.discarded_mass > 0.0 {
            writeln!(w, "# truncated mass before renormalization: {:e}", self.discarded_mass)?;
        }
        for (l, p) in self.iter() {
            writeln!(w, "{l}\t{p:e}")?;
        }
        Ok(())
    }
}

fn validate_weights(w: &[f64]) -> Result<()> {
    if w.is_empty() {
        return Err(domain("empty run-length distribution"));
    }
    if let Some((i, p)) = w.iter().enumerate().find(|(_, p)| !(**p >= 0.0 && p.is_finite())) {
        return Err(domain(format!("invalid probability {p} at run length {}", i + 1)));
    }
    Ok(())
}

/// `2^-l` truncated to `1..=l_max` and renormalized.
pub fn geometric_half(l_max: usize) -> Result<RunLengthDistribution> {
    if l_max == 0 {
        return Err(domain("l_max must be at least 1"));
    }
    let weights: Vec<f64> = (1..=l_max).map(|l| (-(l as f64)).exp2()).collect();
    RunLengthDistribution::from_weights(weights, (-(l_max as f64)).exp2())
}

/// Which logarithm the perturbation `l log l` uses.
///
/// Only [`LogBase::Natural`] yields a perturbation with zero total mass; the
/// binary variant exists to demonstrate that.
#[doc(hidden)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogBase {
    Natural,
    Binary,
}

/// Pre-normalization weights `2^-l (1 + d (l log l - c2 l / 2))` for `l = 1..=l_max`.
#[doc(hidden)]
pub fn dagger_weights(d: f64, l_max: usize, base: LogBase) -> Result<Vec<f64>> {
    if !(d >= 0.0 && d.is_finite()) {
        return Err(domain(format!("deletion probability must be non-negative, got {d}")));
    }
    if l_max == 0 {
        return Err(domain("l_max must be at least 1"));
    }
    let c2 = default_constants().c2;
    (1..=l_max)
        .map(|l| {
            let x = l as f64;
            let llogl = match base {
                LogBase::Natural => llnl(l),
                LogBase::Binary => x * x.log2(),
            };
            let w = (-x).exp2() * (1.0 + d * (llogl - c2 * x / 2.0));
            if w < 0.0 {
                Err(Error::NegativeMass { l, weight: w })
            } else {
                Ok(w)
            }
        })
        .collect()
}

/// The capacity-achieving run-length distribution
/// `2^-l (1 + d (l ln l - c2 l / 2))`, truncated to `l_max` and renormalized.
pub fn dagger_distribution(d: f64, l_max: usize) -> Result<RunLengthDistribution> {
    let weights = dagger_weights(d, l_max, LogBase::Natural)?;
    let kept = csum(weights.iter().copied());
    // The untruncated weights sum to exactly one.
    RunLengthDistribution::from_weights(weights, (1.0 - kept).max(0.0))
}

/// A stationary ergodic binary source the toolkit can sample.
#[derive(Debug, Clone, PartialEq)]
pub enum SourceSpec {
    /// i.i.d. uniform bits.
    BernoulliHalf,
    /// Symmetric first-order Markov chain with `P(X_i = X_{i-1}) = p_same`.
    Markov { p_same: f64 },
    /// Alternating runs with i.i.d. lengths.
    Renewal(RunLengthDistribution),
}

impl SourceSpec {
    pub fn markov(p_same: f64) -> Result<Self> {
        if !(p_same > 0.0 && p_same < 1.0) {
            return Err(domain(format!("Markov p_same must lie in (0, 1), got {p_same}")));
        }
        Ok(Self::Markov { p_same })
    }

    /// The run-length distribution when the source has i.i.d. runs with a
    /// finite support (Bernoulli gets the truncated geometric law).
    pub fn renewal_distribution(&self) -> Option<RunLengthDistribution> {
        match self {
            SourceSpec::BernoulliHalf => geometric_half(DEFAULT_L_MAX).ok(),
            SourceSpec::Renewal(dist) => Some(dist.clone()),
            SourceSpec::Markov { .. } => None,
        }
    }

    pub fn label(&self) -> String {
        match self {
            SourceSpec::BernoulliHalf => "bernoulli".into(),
            SourceSpec::Markov { p_same } => format!("markov:{p_same}"),
            SourceSpec::Renewal(d) => format!("renewal(l_max={}, mean={:.6})", d.l_max(), d.mean()),
        }
    }
}

/// Samples `n` bits of `spec`, deterministically in `(spec, n, seed, stationary_start)`.
///
/// Renewal sources start at a run boundary unless `stationary_start` is set,
/// in which case the first run is size-biased with a uniform offset.
pub fn sample_sequence(spec: &SourceSpec, n: usize, seed: u64, stationary_start: bool) -> Result<BinarySequence> {
    let mut rng = stream(seed, Purpose::Source, 0);
    sample_with_rng(spec, n, stationary_start, &mut rng)
}

/// Reusable sampler; holds the alias-free cumulative tables for renewal sources.
#[derive(Debug, Clone)]
pub struct Sampler {
    kind: SamplerKind,
}

#[derive(Debug, Clone)]
enum SamplerKind {
    Bernoulli,
    Markov(f64),
    Renewal {
        lengths: WeightedIndex<f64>,
        size_biased: WeightedIndex<f64>,
    },
}

impl Sampler {
    pub fn new(spec: &SourceSpec) -> Result<Self> {
        let kind = match spec {
            SourceSpec::BernoulliHalf => SamplerKind::Bernoulli,
            SourceSpec::Markov { p_same } => {
                check_probability("p_same", *p_same)?;
                SamplerKind::Markov(*p_same)
            }
            SourceSpec::Renewal(dist) => {
                let lengths = WeightedIndex::new(dist.probs().iter().copied())
                    .map_err(|e| domain(format!("bad run-length distribution: {e}")))?;
                let size_biased = WeightedIndex::new(dist.iter().map(|(l, p)| l as f64 * p))
                    .map_err(|e| domain(format!("bad run-length distribution: {e}")))?;
                SamplerKind::Renewal { lengths, size_biased }
            }
        };
        Ok(Self { kind })
    }

    /// Appends `n` bits to `out`.
    pub fn fill<R: Rng + ?Sized>(&self, n: usize, stationary_start: bool, rng: &mut R, out: &mut Vec<u8>) {
        out.reserve(n);
        let target = out.len() + n;
        match &self.kind {
            SamplerKind::Bernoulli => {
                while out.len() < target {
                    let word: u64 = rng.gen();
                    let take = (target - out.len()).min(64);
                    out.extend((0..take).map(|k| ((word >> k) & 1) as u8));
                }
            }
            SamplerKind::Markov(p_same) => {
                if n == 0 {
                    return;
                }
                let mut b: u8 = rng.gen_range(0..2);
                out.push(b);
                while out.len() < target {
                    if !rng.gen_bool(*p_same) {
                        b ^= 1;
                    }
                    out.push(b);
                }
            }
            SamplerKind::Renewal { lengths, size_biased } => {
                if n == 0 {
                    return;
                }
                let mut b: u8 = rng.gen_range(0..2);
                let first = if stationary_start {
                    let l = size_biased.sample(rng) + 1;
                    rng.gen_range(1..=l)
                } else {
                    lengths.sample(rng) + 1
                };
                let take = first.min(target - out.len());
                out.extend(std::iter::repeat_n(b, take));
                while out.len() < target {
                    b ^= 1;
                    let l = lengths.sample(rng) + 1;
                    let take = l.min(target - out.len());
                    out.extend(std::iter::repeat_n(b, take));
                }
            }
        }
    }
}

pub(crate) fn sample_with_rng<R: Rng + ?Sized>(
    spec: &SourceSpec,
    n: usize,
    stationary_start: bool,
    rng: &mut R,
) -> Result<BinarySequence> {
    let sampler = Sampler::new(spec)?;
    let mut bits = Vec::with_capacity(n);
    sampler.fill(n, stationary_start, rng, &mut bits);
    Ok(BinarySequence::from_bits_unchecked(bits))
}
