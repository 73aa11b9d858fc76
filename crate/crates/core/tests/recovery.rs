use phiquad::recovery::{direct_divergence, recover_all, recover_divergence, RecoveryRoute};
use phiquad::DivergenceSpec;

fn kl_value(q: &[f64], p: &[f64]) -> f64 {
    q.iter().zip(p).map(|(q, p)| p * if *q == 0.0 { 1.0 } else { q * q.ln() - q + 1.0 }).sum()
}

fn within(got: f64, truth: f64, rel: f64) -> bool {
    (got - truth).abs() <= rel * truth.abs().max(1e-12)
}

#[test]
fn unit_weights_recover_zero() {
    for spec in [DivergenceSpec::kl(), DivergenceSpec::pearson_chi2()] {
        for r in recover_all(&spec, &[1.0, 1.0], &[0.5, 0.5]).unwrap() {
            assert!(r.value.abs() <= 1e-6, "{spec} {r:?}");
        }
    }
    let r = recover_divergence(&DivergenceSpec::tvd(), &[1.0, 1.0], &[0.5, 0.5], RecoveryRoute::Risk).unwrap();
    assert!(r.value.abs() <= 1e-6, "{r:?}");
}

#[test]
fn kl_two_atoms() {
    let (q, p) = ([0.5, 1.5], [0.5, 0.5]);
    let truth = kl_value(&q, &p);
    assert!((direct_divergence(&DivergenceSpec::kl(), &q, &p) - truth).abs() <= 1e-15);
    for r in recover_all(&DivergenceSpec::kl(), &q, &p).unwrap() {
        assert!(within(r.value, truth, 0.05), "{r:?} vs {truth}");
        assert!(r.value <= truth + 1e-9);
    }
}

#[test]
fn pearson_two_atoms() {
    let (q, p) = ([0.0, 2.0], [0.5, 0.5]);
    for r in recover_all(&DivergenceSpec::pearson_chi2(), &q, &p).unwrap() {
        assert!(within(r.value, 1.0, 0.05), "{r:?}");
        assert!(r.value <= 1.0 + 1e-9);
    }
}

/// Three atoms on the two routes without a location search; the other two are exercised on two atoms.
#[test]
fn three_atoms_routes_agree_and_stay_below_truth() {
    let (q, p) = ([0.4, 1.0, 1.6], [1.0 / 3.0; 3]);
    for spec in [DivergenceSpec::kl(), DivergenceSpec::pearson_chi2()] {
        let truth = direct_divergence(&spec, &q, &p);
        let all: Vec<_> = [RecoveryRoute::Risk, RecoveryRoute::Deviation]
            .into_iter()
            .map(|route| recover_divergence(&spec, &q, &p, route).unwrap())
            .collect();
        for r in &all {
            assert!(r.value <= truth + 1e-9, "{spec} {r:?}");
            assert!(within(r.value, truth, 0.05), "{spec} {r:?} vs {truth}");
        }
        let (lo, hi) = all.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| (a.min(r.value), b.max(r.value)));
        assert!(hi - lo <= 0.05 * truth, "{spec} {all:?}");
    }
}

#[test]
fn rejects_unsupported_inputs() {
    let p = [0.5, 0.5];
    assert!(recover_divergence(&DivergenceSpec::pearson_chi2_extended(), &[0.0, 2.0], &p, RecoveryRoute::Risk).is_err());
    assert!(recover_divergence(&DivergenceSpec::kl(), &[0.5, 1.0], &p, RecoveryRoute::Risk).is_err());
    assert!(recover_divergence(&DivergenceSpec::kl(), &[1.0; 5], &[0.2; 5], RecoveryRoute::Risk).is_err());
}
