//! Series constants of the small-`d` capacity expansion and the capacity
//! estimate `C_est(d) = 1 + d log2 d - A1 d + A2 d^2`.
//!
//! Every constant is a series of the form `sum_l 2^-l g(l)` (or a double sum
//! dominated by a product of two such series). The series is truncated at a
//! common index `L` and the remainder is bounded by a geometric-tail
//! majorant:
//!
//! if `|g(l)| <= G(l)` where `G` is a product of factors `(l + c)` (`c >= 0`)
//! and logarithms, of total degree `m`, then `G(L + k) <= G(L) (1 + k/L)^m`
//! for `L >= 3`, and for `L >= 4m`
//!
//! ```text
//! sum_{k>=1} 2^-(L+k) G(L+k) <= 2^-L G(L) sum_{k>=1} (e^{1/4} / 2)^k <= 1.8 * 2^-L G(L).
//! ```
//!
//! The bounds are propagated through the algebra that assembles `A1`, `A2`
//! and `A2'`. Natural logs are used where the definitions call for them
//! (`c2`, `c5`'s prefactor, the auxiliary sums); everything reported as a
//! rate is in bits.

use std::f64::consts::{E, LN_2};
use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{domain, Result};
use crate::numeric::{h2, llnl, CompensatedSum};

/// Smallest truncation index considered.
const MIN_CUTOFF: usize = 16;
/// Past this index `2^-L` underflows and the majorant stops being useful.
const MAX_CUTOFF: usize = 1000;
/// Tolerance used for the process-wide cached constants.
pub const DEFAULT_TOLERANCE: f64 = 1e-13;

/// The constants of the expansion together with a sound bound on the error
/// caused by truncating their series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesConstants {
    /// `sum 2^-l l ln l` (natural log).
    pub c2: f64,
    /// Second-order single-run ambiguity constant, bits.
    pub c3: f64,
    /// Parent-run (`K`) ambiguity constant, bits.
    pub c4: f64,
    /// Optimal Markov perturbation slope (dimensionless).
    pub c5: f64,
    /// Linear coefficient, bits.
    #[serde(rename = "A1")]
    pub a1: f64,
    /// Quadratic coefficient for the optimal source, bits.
    #[serde(rename = "A2")]
    pub a2: f64,
    /// Quadratic coefficient for the best first-order Markov source, bits.
    #[serde(rename = "A2_prime")]
    pub a2_prime: f64,
    /// `sum 2^-l (l ln l)^2`.
    pub sum_l_ln_l_sq: f64,
    /// `sum 2^-l l^2 ln l`.
    pub sum_l2_ln_l: f64,
    /// Upper bound on the truncation error of every field above.
    pub truncation_error_bound: f64,
    /// Truncation index used for all single sums (and both axes of the double sum).
    pub cutoff: usize,
}

impl SeriesConstants {
    /// `A1` assembled from `c2`: `log2(2e) - c2 / (2 ln 2)`.
    ///
    /// `a1` itself is summed directly from `sum 2^-(l+1) l log2 l`; the two
    /// routes must agree.
    pub fn a1_from_c2(&self) -> f64 {
        (2.0 * E).log2() - self.c2 / (2.0 * LN_2)
    }
}

/// Binary entropy `h(p) = -p log2 p - (1-p) log2 (1-p)` in bits.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(domain(format!("binary entropy of {p}: not a probability")));
    }
    Ok(h2(p))
}

/// Computes every constant with truncation error at most `tol`.
pub fn compute_constants(tol: f64) -> Result<SeriesConstants> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(domain(format!("tolerance must be positive, got {tol}")));
    }
    let cutoff = (MIN_CUTOFF..=MAX_CUTOFF)
        .find(|&l| error_bounds(l).max() <= tol)
        .ok_or_else(|| domain(format!("tolerance {tol} is below what double precision can certify")))?;
    Ok(constants_at_cutoff(cutoff))
}

/// Constants computed at the default tolerance, cached for the process.
pub fn default_constants() -> &'static SeriesConstants {
    static CACHE: OnceLock<SeriesConstants> = OnceLock::new();
    CACHE.get_or_init(|| compute_constants(DEFAULT_TOLERANCE).expect("default tolerance is attainable"))
}

/// `C_est(d) = 1 + d log2 d - A1 d + A2 d^2` in bits per channel use.
pub fn capacity_estimate(d: f64, consts: &SeriesConstants) -> Result<f64> {
    if !(0.0..1.0).contains(&d) {
        return Err(domain(format!("deletion probability must lie in [0, 1), got {d}")));
    }
    let dlogd = if d == 0.0 { 0.0 } else { d * d.log2() };
    Ok(1.0 + dlogd - consts.a1 * d + consts.a2 * d * d)
}

/// Evaluates all series truncated at `cutoff` (inclusive).
pub fn constants_at_cutoff(cutoff: usize) -> SeriesConstants {
    let cutoff = cutoff.max(MIN_CUTOFF);
    let mut c2 = CompensatedSum::new();
    let mut a1_series = CompensatedSum::new();
    let mut s1 = CompensatedSum::new();
    let mut s2 = CompensatedSum::new();
    let mut s5 = CompensatedSum::new();
    let mut c3_bracket = CompensatedSum::new();
    // Walk from the tail inwards so small terms accumulate first.
    for l in (1..=cutoff).rev() {
        let w = (-(l as f64)).exp2();
        let x = l as f64;
        let ln_l = x.ln();
        c2.add(w * llnl(l));
        a1_series.add(0.5 * w * x * x.log2());
        s1.add(w * llnl(l) * llnl(l));
        s2.add(w * x * x * ln_l);
        s5.add(w * x * (x - 3.0) * x.log2());
        if l >= 3 {
            c3_bracket.add(w * c3_term(l));
        }
    }
    let c2 = c2.value();
    let s1 = s1.value();
    let s2 = s2.value();
    let c3 = 0.5 * (-1.0 + c3_bracket.value());
    let c4 = c4_truncated(cutoff);
    let c5 = LN_2 / 4.0 * s5.value();
    let a1 = (2.0 * E).log2() - a1_series.value();
    let a2 = c3 + c4 + (2.0 + 1.5 * c2 * c2 + s1 - c2 * s2) / (4.0 * LN_2);
    let a2_prime = 2.0 * c5 * c5 / LN_2 + c3 + c4 + 1.0 / (2.0 * LN_2);

    let e = error_bounds(cutoff);
    let e_a2 = e.c3
        + e.c4
        + (1.5 * (2.0 * c2.abs() + e.c2) * e.c2 + e.s1 + c2.abs() * e.s2 + s2.abs() * e.c2 + e.c2 * e.s2)
            / (4.0 * LN_2);
    let e_c5 = LN_2 / 4.0 * e.s5;
    let e_a2p = 2.0 * (2.0 * c5.abs() + e_c5) * e_c5 / LN_2 + e.c3 + e.c4;
    let bound = [e.c2, e.c3, e.c4, e_c5, e.a1, e_a2, e_a2p, e.s1, e.s2]
        .into_iter()
        .fold(0.0f64, f64::max);

    SeriesConstants {
        c2,
        c3,
        c4,
        c5,
        a1,
        a2,
        a2_prime,
        sum_l_ln_l_sq: s1,
        sum_l2_ln_l: s2,
        truncation_error_bound: bound,
        cutoff,
    }
}

fn c3_term(l: usize) -> f64 {
    let x = l as f64;
    let pairs = x * (x - 1.0) / 2.0;
    let lg = |v: f64| if v > 0.0 { v.log2() } else { 0.0 };
    pairs * lg(pairs) - x * x * lg(x) + (x - 1.0) * (x - 3.0) * lg(x - 1.0) + (x - 2.0) * lg(x - 2.0)
}

fn c4_truncated(cutoff: usize) -> f64 {
    let mut acc = CompensatedSum::new();
    for j in (4..=cutoff).rev() {
        let jf = j as f64;
        acc.add((-(2.0 + jf)).exp2() * (jf - 1.0) * (jf - 3.0) * h2(1.0 / (jf - 1.0)));
    }
    for i in (2..=cutoff).rev() {
        let fi = i as f64;
        for j in (4..=cutoff).rev() {
            let fj = j as f64;
            let total = fi + fj - 1.0;
            acc.add((-(fi + fj + 1.0)).exp2() * total * (fj - 3.0) * h2((fi + 1.0) / total));
        }
    }
    acc.value()
}

#[derive(Debug, Clone, Copy)]
struct ErrorBounds {
    c2: f64,
    s1: f64,
    s2: f64,
    s5: f64,
    a1: f64,
    c3: f64,
    c4: f64,
}

impl ErrorBounds {
    fn max(&self) -> f64 {
        // Mirrors the propagation in `constants_at_cutoff` using the known
        // magnitudes |c2| < 2, |s2| < 20, |c5| < 1 as a priori caps.
        let e_a2 = self.c3
            + self.c4
            + (1.5 * (4.0 + self.c2) * self.c2 + self.s1 + 2.0 * self.s2 + 20.0 * self.c2 + self.c2 * self.s2)
                / (4.0 * LN_2);
        let e_c5 = LN_2 / 4.0 * self.s5;
        let e_a2p = 2.0 * (2.0 + e_c5) * e_c5 / LN_2 + self.c3 + self.c4;
        [self.c2, self.s1, self.s2, e_c5, self.a1, self.c3, self.c4, e_a2, e_a2p]
            .into_iter()
            .fold(0.0f64, f64::max)
    }
}

/// `1.8 * 2^-L * G(L)`; valid for `L >= max(3, 4 * degree)`.
fn geometric_tail(cutoff: usize, majorant_at_cutoff: f64, degree: u32) -> f64 {
    if cutoff < 3 || cutoff < 4 * degree as usize {
        return f64::INFINITY;
    }
    1.8 * (-(cutoff as f64)).exp2() * majorant_at_cutoff
}

fn error_bounds(cutoff: usize) -> ErrorBounds {
    let x = cutoff as f64;
    let ln = x.ln();
    let lg = x.log2();
    // Double sum majorant: 2^-(i+j+1)(i+j-1)(j-3)h <= (1/2) [2^-i (i+1)] [2^-j j(j+1)];
    // full sums of the factors are at most 3 and 8.
    let f_tail = geometric_tail(cutoff, x + 1.0, 1);
    let g_tail = geometric_tail(cutoff, x * (x + 1.0), 2);
    let c4_double = 0.5 * (f_tail * 8.0 + 3.0 * g_tail);
    let c4_single = geometric_tail(cutoff, x * x / 4.0, 2);
    ErrorBounds {
        c2: geometric_tail(cutoff, x * ln, 2),
        s1: geometric_tail(cutoff, (x * ln).powi(2), 4),
        s2: geometric_tail(cutoff, x * x * ln, 3),
        s5: geometric_tail(cutoff, x * x * lg, 3),
        a1: geometric_tail(cutoff, 0.5 * x * lg, 2),
        c3: 0.5 * geometric_tail(cutoff, 4.0 * x * x * lg, 3),
        c4: c4_single + c4_double,
    }
}
