//! Closed-form pieces of the small-d expansion, evaluated for renewal sources.
//!
//! Joint laws of consecutive runs are products of the single-run pmf, so
//! every evaluator takes a [`RunLengthDistribution`] and sums to its `l_max`
//! (or to a cutoff it reports). Results are in bits per input bit.

use serde::Serialize;

use crate::constants::SeriesConstants;
use crate::error::{check_probability, domain, Result};
use crate::numeric::{csum, h2, llog2l, xlog2x};
use crate::sources::RunLengthDistribution;

/// A formula value and the largest run length its sums reached.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FormulaValue {
    pub value: f64,
    pub cutoff: usize,
}

fn check_d(d: f64) -> Result<()> {
    check_probability("d", d)?;
    if d >= 1.0 {
        return Err(domain("d must be below 1"));
    }
    Ok(())
}

/// Per-bit entropy of the modified deletion pattern given the input, output
/// and parent-run lengths: the single-deletion term at order `d`, plus the
/// double-deletion, neighbour-correction and fused-run terms at order `d^2`.
pub fn hat_d_entropy_formula(p: &RunLengthDistribution, d: f64) -> Result<FormulaValue> {
    check_d(d)?;
    let top = p.l_max();
    let out = |value| Ok(FormulaValue { value, cutoff: top });
    if d == 0.0 {
        return out(0.0);
    }
    let mu = p.mean();
    let p1 = p.prob(1);
    let many = || p.iter().skip(1);

    let single = csum(many().map(|(l, q)| q * llog2l(l)));
    let pairs = csum(many().map(|(l, q)| {
        let c = (l * (l - 1) / 2) as f64;
        q * (xlog2x(c) - (l * l) as f64 * (l as f64).log2())
    }));
    // Neighbours longer than one versus both neighbours of length one.
    let neighbours = ((1.0 - p1).powi(2) - p1 * p1) * single;
    // A deleted length-one run fuses the runs on either side.
    let fused = csum(many().flat_map(|(l0, a)| p.iter().map(move |(l2, b)| a * p1 * b * llog2l(l0 + l2))))
        + p1 * p1 * csum(p.iter().map(|(l, q)| q * llog2l(l)));

    out(d / mu * single + d * d / mu * (pairs + neighbours + fused))
}

/// Per-bit entropy of the perturbed parent-run lengths given input and output.
pub fn k_entropy_formula(p: &RunLengthDistribution, d: f64) -> Result<FormulaValue> {
    check_d(d)?;
    let top = p.l_max();
    if d == 0.0 {
        return Ok(FormulaValue { value: 0.0, cutoff: top });
    }
    let p1 = p.prob(1);
    let mut pow = vec![1.0; top + 2];
    for k in 1..pow.len() {
        pow[k] = pow[k - 1] * p1;
    }
    let mut lead = Vec::new();
    let mut inner = Vec::new();
    for k in 2..=top {
        for (l, q) in p.iter().skip(1) {
            let span = (k - 1 + l) as f64;
            lead.push(pow[k + 1] * q * span * h2(1.0 / span));
            for (l0, q0) in p.iter().skip(1) {
                let span = (l0 + k - 1 + l) as f64;
                inner.push(q0 * pow[k] * q * span * h2((l0 + 1) as f64 / span));
            }
        }
    }
    Ok(FormulaValue {
        value: d * d / p.mean() * (csum(lead) + csum(inner)),
        cutoff: top,
    })
}

/// The run cutoff `floor(4 log2(1/d))`, capped at `l_max`.
pub fn run_cutoff(d: f64, l_max: usize) -> usize {
    if d <= 0.0 {
        return l_max;
    }
    ((4.0 * (1.0 / d).log2()).floor() as usize).min(l_max)
}

/// Per-bit `H(Y, K | X)` in terms of the output run-length pmf `q`.
pub fn hy_given_x_formula(q: &RunLengthDistribution, d: f64, consts: &SeriesConstants) -> Result<FormulaValue> {
    check_d(d)?;
    let ell = run_cutoff(d, q.l_max());
    if d == 0.0 {
        return Ok(FormulaValue { value: 0.0, cutoff: ell });
    }
    let ln2 = std::f64::consts::LN_2;
    let c2 = consts.c2;
    let head = || q.iter().take(ell);
    let value = -d / 2.0 * csum(head().skip(1).map(|(l, p)| p * llog2l(l)))
        + d * c2 / (4.0 * ln2) * csum(head().map(|(l, p)| p * l as f64))
        + d * (1.0 / d).log2()
        + d / ln2 * (1.0 - c2 / 2.0)
        + d * d * (-consts.c3 - 1.0 / (2.0 * ln2));
    Ok(FormulaValue { value, cutoff: ell })
}

fn expansion(d: f64, a1: f64, a2: f64) -> Result<f64> {
    check_d(d)?;
    let dlogd = if d == 0.0 { 0.0 } else { d * d.log2() };
    Ok(1.0 + dlogd - a1 * d + a2 * d * d)
}

/// Upper bound on the rate of any symmetric first-order Markov source.
pub fn markov_rate_bound(d: f64, consts: &SeriesConstants) -> Result<f64> {
    expansion(d, consts.a1, consts.a2_prime)
}

/// Best rate of the jigsaw decoder on Markov sources.
pub fn jigsaw_rate_bound(d: f64, consts: &SeriesConstants) -> Result<f64> {
    expansion(d, consts.a1, consts.a2_prime - consts.c4)
}

/// `P(X_i = X_{i-1})` of the best symmetric Markov source: `1/2 + c5 d`.
pub fn optimal_markov_param(d: f64, consts: &SeriesConstants) -> Result<f64> {
    if d.is_nan() || d < 0.0 {
        return Err(domain(format!("d must be non-negative, got {d}")));
    }
    let p = 0.5 + consts.c5 * d;
    if p >= 1.0 {
        return Err(domain(format!("1/2 + c5 d = {p} is not below 1 at d = {d}")));
    }
    Ok(p)
}

/// The maximizer `B 2^-l 2^(d(l log2 l - S l / 2))`, `S = c2 / ln 2`, on `1..=ell`.
/// Returns the distribution and the normalizer `B`.
pub fn optimal_truncated_qstar(d: f64, ell: usize, consts: &SeriesConstants) -> Result<(RunLengthDistribution, f64)> {
    if !(0.0..0.3).contains(&d) {
        return Err(domain(format!("d must lie in [0, 0.3), got {d}")));
    }
    if ell < 2 {
        return Err(domain("ell must be at least 2"));
    }
    let s = consts.c2 / std::f64::consts::LN_2;
    let weights: Vec<f64> = (1..=ell)
        .map(|l| {
            let x = l as f64;
            (-x + d * (llog2l(l) - s * x / 2.0)).exp2()
        })
        .collect();
    let b = 1.0 / csum(weights.iter().copied());
    let dist = RunLengthDistribution::from_probs(weights.iter().map(|w| w * b).collect())
        .or_else(|_| RunLengthDistribution::from_weights(weights, 0.0))?;
    Ok((dist, b))
}
