//! Empirical run statistics of sample paths, and exact statistics of
//! run-length distributions.
//!
//! Empirical statistics follow the block perspective: only runs that start
//! and end inside the sequence are counted, so the first and last runs (or
//! super-runs) are always discarded.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::channel::{run_lengths, segment_super_runs, SuperRunType};
use crate::error::{Error, Result};
use crate::numeric::csum;
use crate::sources::{BinarySequence, RunLengthDistribution};

/// Default cap on tabulated run lengths.
pub const DEFAULT_L_CAP: usize = 64;

/// Run-length counts with an overflow bucket, built one run at a time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunLengthCounter {
    counts: Vec<u64>,
    overflow: u64,
    total_len: u64,
    n_runs: u64,
}

impl RunLengthCounter {
    pub fn new(l_cap: usize) -> Self {
        Self {
            counts: vec![0; l_cap],
            overflow: 0,
            total_len: 0,
            n_runs: 0,
        }
    }

    pub fn push(&mut self, l: usize) {
        debug_assert!(l >= 1);
        match self.counts.get_mut(l - 1) {
            Some(c) => *c += 1,
            None => self.overflow += 1,
        }
        self.total_len += l as u64;
        self.n_runs += 1;
    }

    pub fn merge(&mut self, other: &Self) {
        if other.counts.len() > self.counts.len() {
            self.counts.resize(other.counts.len(), 0);
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.overflow += other.overflow;
        self.total_len += other.total_len;
        self.n_runs += other.n_runs;
    }

    /// Removes the runs of `other`, which must have been merged in earlier.
    pub fn subtract(&mut self, other: &Self) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a -= b;
        }
        self.overflow -= other.overflow;
        self.total_len -= other.total_len;
        self.n_runs -= other.n_runs;
    }

    pub fn count(&self, l: usize) -> u64 {
        if l == 0 {
            0
        } else {
            self.counts.get(l - 1).copied().unwrap_or(0)
        }
    }

    pub fn overflow(&self) -> u64 {
        self.overflow
    }

    pub fn n_runs(&self) -> u64 {
        self.n_runs
    }

    pub fn total_len(&self) -> u64 {
        self.total_len
    }

    /// Mean run length, overflow runs included.
    pub fn mean(&self) -> f64 {
        self.total_len as f64 / self.n_runs as f64
    }

    /// Plug-in entropy in bits, with the overflow bucket as one extra symbol.
    /// `miller_madow` adds `(K - 1) / (2 N ln 2)` for `K` occupied symbols.
    pub fn entropy(&self, miller_madow: bool) -> f64 {
        let n = self.n_runs as f64;
        let occupied = self.counts.iter().chain(std::iter::once(&self.overflow)).filter(|&&c| c > 0);
        let h = -csum(occupied.clone().map(|&c| {
            let p = c as f64 / n;
            p * p.log2()
        }));
        if miller_madow {
            h + (occupied.count() as f64 - 1.0) / (2.0 * n * std::f64::consts::LN_2)
        } else {
            h
        }
    }

    /// Normalized pmf over `1..=l_cap`, overflow excluded.
    pub fn to_distribution(&self) -> Result<RunLengthDistribution> {
        let last = self.counts.iter().rposition(|&c| c > 0).ok_or(Error::TooFew {
            what: "runs within the length cap",
            found: 0,
            needed: 1,
        })?;
        let weights = self.counts[..=last].iter().map(|&c| c as f64).collect();
        let discarded = self.overflow as f64 / self.n_runs as f64;
        RunLengthDistribution::from_weights(weights, discarded)
    }
}

/// Palm-measure statistics estimated from one sample path.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalRunStats {
    /// Estimated run-length pmf (super-run length pmf for super-run stats).
    pub pmf: RunLengthDistribution,
    pub mu_hat: f64,
    pub n_runs: usize,
    /// Runs longer than the cap: counted in `mu_hat`, excluded from `pmf`.
    pub overflow_runs: usize,
    pub kblock_pmf: Option<BTreeMap<Vec<usize>, f64>>,
    pub super_run_pmf: Option<BTreeMap<SuperRunType, f64>>,
    /// Mean super-run length.
    pub mu_tilde_hat: Option<f64>,
}

/// How consecutive run tuples are sampled for the k-block pmf.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KBlockMode {
    NonOverlapping,
    /// Every window; samples are strongly dependent, so error bars from it are too small.
    Overlapping,
}

/// Interior-run statistics of `x`, with the k-block pmf over
/// non-overlapping tuples when `k > 1`.
pub fn empirical_run_distribution(x: &BinarySequence, k: usize, l_cap: usize) -> Result<EmpiricalRunStats> {
    empirical_run_distribution_with(x, k, l_cap, KBlockMode::NonOverlapping)
}

pub fn empirical_run_distribution_with(
    x: &BinarySequence,
    k: usize,
    l_cap: usize,
    mode: KBlockMode,
) -> Result<EmpiricalRunStats> {
    let k = k.max(1);
    let lengths = run_lengths(x);
    let interior = interior(&lengths);
    if interior.len() < k {
        return Err(Error::TooFew {
            what: "interior runs",
            found: interior.len(),
            needed: k,
        });
    }
    let mut counter = RunLengthCounter::new(l_cap);
    interior.iter().for_each(|&l| counter.push(l));
    let kblock_pmf = (k > 1).then(|| kblock_pmf(interior, k, mode));
    Ok(EmpiricalRunStats {
        pmf: counter.to_distribution()?,
        mu_hat: counter.mean(),
        n_runs: interior.len(),
        overflow_runs: counter.overflow() as usize,
        kblock_pmf,
        super_run_pmf: None,
        mu_tilde_hat: None,
    })
}

fn interior<T>(items: &[T]) -> &[T] {
    if items.len() <= 2 {
        &[]
    } else {
        &items[1..items.len() - 1]
    }
}

fn kblock_pmf(lengths: &[usize], k: usize, mode: KBlockMode) -> BTreeMap<Vec<usize>, f64> {
    let mut counts: BTreeMap<Vec<usize>, u64> = BTreeMap::new();
    let mut total = 0u64;
    let mut tally = |w: &[usize]| {
        *counts.entry(w.to_vec()).or_default() += 1;
        total += 1;
    };
    match mode {
        KBlockMode::NonOverlapping => lengths.chunks_exact(k).for_each(&mut tally),
        KBlockMode::Overlapping => lengths.windows(k).for_each(&mut tally),
    }
    counts.into_iter().map(|(key, c)| (key, c as f64 / total as f64)).collect()
}

/// Interior super-run statistics of `x`. `pmf` holds the super-run length
/// pmf and `mu_tilde_hat` its mean.
pub fn empirical_super_run_distribution(x: &BinarySequence) -> Result<EmpiricalRunStats> {
    let all = segment_super_runs(x);
    let inner = interior(&all);
    if inner.is_empty() {
        return Err(Error::TooFew {
            what: "super-runs",
            found: all.len(),
            needed: 3,
        });
    }
    let mut types: BTreeMap<SuperRunType, u64> = BTreeMap::new();
    let mut counter = RunLengthCounter::new(DEFAULT_L_CAP);
    for t in inner {
        *types.entry(*t).or_default() += 1;
        counter.push(t.len());
    }
    let n = inner.len() as f64;
    let mu = counter.mean();
    Ok(EmpiricalRunStats {
        pmf: counter.to_distribution()?,
        mu_hat: mu,
        n_runs: inner.len(),
        overflow_runs: counter.overflow() as usize,
        kblock_pmf: None,
        super_run_pmf: Some(types.into_iter().map(|(t, c)| (t, c as f64 / n)).collect()),
        mu_tilde_hat: Some(mu),
    })
}

/// Exact statistics of a run-length distribution, in bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistributionStats {
    #[serde(rename = "H_L")]
    pub h_l: f64,
    pub mu: f64,
    /// `D(p || 2^-l)`.
    #[serde(rename = "D")]
    pub d_vs_geometric: f64,
    /// `H(L) / mu`: the entropy rate of the renewal source with these runs.
    pub renewal_entropy_rate: f64,
}

pub fn distribution_stats(p: &RunLengthDistribution) -> DistributionStats {
    let support = || p.iter().filter(|&(_, q)| q > 0.0);
    let h_l = -csum(support().map(|(_, q)| q * q.log2()));
    let d = csum(support().map(|(l, q)| q * (q.log2() + l as f64)));
    DistributionStats {
        h_l,
        mu: p.mean(),
        d_vs_geometric: d,
        renewal_entropy_rate: h_l / p.mean(),
    }
}

/// `sum_{l >= ell} l p(l)`.
pub fn tail_mass(p: &RunLengthDistribution, ell: usize) -> f64 {
    csum(p.iter().skip(ell.saturating_sub(1)).map(|(l, q)| l as f64 * q))
}

/// JSON shape of exported run statistics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatsExport {
    pub pmf: Vec<(usize, f64)>,
    pub mu: f64,
    #[serde(rename = "H_L")]
    pub h_l: f64,
    #[serde(rename = "D")]
    pub d: f64,
    pub n_runs: usize,
}

impl EmpiricalRunStats {
    pub fn export(&self) -> StatsExport {
        let s = distribution_stats(&self.pmf);
        StatsExport {
            pmf: self.pmf.iter().filter(|&(_, p)| p > 0.0).collect(),
            mu: self.mu_hat,
            h_l: s.h_l,
            d: s.d_vs_geometric,
            n_runs: self.n_runs,
        }
    }

    /// Largest `|p(l) - q(l)|` over `l <= up_to`.
    pub fn max_pmf_gap(&self, other: &RunLengthDistribution, up_to: usize) -> f64 {
        (1..=up_to).map(|l| (self.pmf.prob(l) - other.prob(l)).abs()).fold(0.0, f64::max)
    }
}

/// Total-variation distance between two run-length pmfs.
pub fn total_variation(p: &RunLengthDistribution, q: &RunLengthDistribution) -> f64 {
    let top = p.l_max().max(q.l_max());
    0.5 * csum((1..=top).map(|l| (p.prob(l) - q.prob(l)).abs()))
}
