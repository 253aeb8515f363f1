use deletion_capacity::estimation::{estimate_rate, n_doubling_drift, RateConfig};
use deletion_capacity::sources::{dagger_distribution, SourceSpec};

#[test]
fn dagger_never_significantly_below_bernoulli() {
    for d in [0.05, 0.1] {
        let cfg = RateConfig {
            n: 1000,
            samples: 300,
            out_bits: 4_000_000,
            seed: 99,
            ..RateConfig::default()
        };
        let dagger = estimate_rate(&SourceSpec::Renewal(dagger_distribution(d, 64).unwrap()), d, &cfg).unwrap();
        let bern = estimate_rate(&SourceSpec::BernoulliHalf, d, &cfg).unwrap();
        let slack = 2.0 * dagger.std_err.hypot(bern.std_err);
        assert!(dagger.rate >= bern.rate - slack, "d = {d}: {} vs {} (slack {slack})", dagger.rate, bern.rate);
    }
}

#[test]
fn h_cond_is_stable_under_doubling_n() {
    for spec in [SourceSpec::BernoulliHalf, SourceSpec::Renewal(dagger_distribution(0.05, 64).unwrap())] {
        let drift = n_doubling_drift(&spec, 0.05, 1000, 400, 5).unwrap();
        assert!(drift.value.abs() <= 2.0 * drift.std_err, "{}: {drift:?}", spec.label());
    }
}
