//! Below threshold the larger lattice must fail less often.

use gsm_threshold::bsm::Protocol;
use gsm_threshold::gsm::Architecture;
use gsm_threshold::threshold::{sweep, CurvePoint, SweepConfig};

fn rates_at(eta: f64, samples: u64, seed: u64) -> (CurvePoint, CurvePoint) {
    let mut config = SweepConfig::new(Architecture::Cyclic, Protocol::Static, 3, 2, 0);
    config.distances = vec![9, 13];
    config.etas = vec![eta];
    config.samples = samples;
    config.seed = seed;
    let curves = sweep(&config).unwrap();
    (curves[0].points[0], curves[1].points[0])
}

#[test]
fn larger_distance_fails_less_often() {
    let (small, large) = rates_at(0.02, 10_000, 11);
    assert!(
        large.rate < small.rate,
        "d=13 {} vs d=9 {}",
        large.rate,
        small.rate
    );
}

// A handful of failures per 1e4 shots cannot separate the intervals, so the
// separation check uses ten times the samples.
#[test]
fn suppression_is_resolved_with_more_samples() {
    let (small, large) = rates_at(0.02, 100_000, 12);
    assert!(
        large.ci_high < small.ci_low,
        "d=13 {:.2e} [{:.2e}, {:.2e}] vs d=9 {:.2e} [{:.2e}, {:.2e}]",
        large.rate,
        large.ci_low,
        large.ci_high,
        small.rate,
        small.ci_low,
        small.ci_high
    );
}
