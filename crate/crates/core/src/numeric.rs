//! Small numeric helpers shared by the series and estimators.

/// Kahan–Babuška (Neumaier) compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Compensated sum of an iterator.
pub fn csum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

/// `x log2 x` with the convention `0 log 0 = 0`.
pub fn xlog2x(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

/// `l log2 l` for a positive integer.
pub fn llog2l(l: usize) -> f64 {
    xlog2x(l as f64)
}

/// `l ln l` for a positive integer.
pub fn llnl(l: usize) -> f64 {
    if l <= 1 {
        0.0
    } else {
        let x = l as f64;
        x * x.ln()
    }
}

/// Binary entropy in bits without domain checking (callers guarantee `0 <= p <= 1`).
pub(crate) fn h2(p: f64) -> f64 {
    -xlog2x(p) - xlog2x(1.0 - p)
}

/// Entropy in bits of the binomial(n, q) distribution.
pub fn binomial_entropy(n: usize, q: f64) -> f64 {
    if n == 0 || q <= 0.0 || q >= 1.0 {
        return 0.0;
    }
    let (lq, lr) = (q.ln(), (1.0 - q).ln());
    let mut log_choose = 0.0f64;
    let mut acc = CompensatedSum::new();
    for k in 0..=n {
        if k > 0 {
            log_choose += ((n - k + 1) as f64).ln() - (k as f64).ln();
        }
        let lp = log_choose + k as f64 * lq + (n - k) as f64 * lr;
        let p = lp.exp();
        if p > 0.0 {
            acc.add(-p * lp);
        }
    }
    acc.value() / std::f64::consts::LN_2
}

/// Mean and standard error of a sample, in input order.
pub fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = csum(xs.iter().copied()) / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = csum(xs.iter().map(|x| (x - mean) * (x - mean))) / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::new();
        s.add(1.0);
        for _ in 0..10 {
            s.add(1e-16);
        }
        s.add(-1.0);
        assert!((s.value() - 1e-15).abs() < 1e-30);
    }

    #[test]
    fn binomial_entropy_small_cases() {
        assert!((binomial_entropy(1, 0.5) - 1.0).abs() < 1e-15);
        // Bin(2, 1/2) = {1/4, 1/2, 1/4}
        assert!((binomial_entropy(2, 0.5) - 1.5).abs() < 1e-14);
        assert_eq!(binomial_entropy(5, 0.0), 0.0);
    }

    proptest::proptest! {
        #[test]
        fn binomial_entropy_is_bounded(n in 0usize..400, q in 0.0f64..=1.0) {
            let h = binomial_entropy(n, q);
            proptest::prop_assert!(h >= -1e-12 && h <= ((n + 1) as f64).log2() + 1e-9, "{}", h);
        }

        #[test]
        fn compensated_sum_is_order_independent(mut xs in proptest::collection::vec(-1e6f64..1e6, 0..200)) {
            let forward = csum(xs.iter().copied());
            xs.reverse();
            proptest::prop_assert!((forward - csum(xs.iter().copied())).abs() <= 1e-6);
        }
    }
}
