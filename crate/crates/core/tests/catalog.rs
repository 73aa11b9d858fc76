use phiquad::divergence::{
    conjugate_oracle, phi_conj_eval, phi_conj_subgrad, phi_eval, validate_phi, validate_spec, GridRange,
};
use phiquad::{DivergenceSpec, ExtendedReal, QuadError};
use proptest::prelude::*;

fn finite(v: ExtendedReal) -> f64 {
    v.finite().expect("finite value")
}

fn catalog_strategy() -> impl Strategy<Value = DivergenceSpec> {
    prop::sample::select(DivergenceSpec::catalog())
}

/// Probe points inside the closed domain of the conjugate.
fn conj_probes(spec: &DivergenceSpec) -> Vec<f64> {
    let (lo, hi) = spec.conj_domain();
    (0..20).map(|i| -2.0 + 4.0 * i as f64 / 19.0).map(|z: f64| z.clamp(lo.max(-2.0), hi.min(2.0))).collect()
}

#[test]
fn phi_values() {
    assert_eq!(phi_eval(&DivergenceSpec::kl(), 1.0), ExtendedReal::Finite(0.0));
    assert_eq!(phi_eval(&DivergenceSpec::pearson_chi2_extended(), -1.0), ExtendedReal::Finite(4.0));
    assert_eq!(phi_eval(&DivergenceSpec::tvd(), -0.5), ExtendedReal::PosInfinity);
    let cvar = DivergenceSpec::indicator_cvar(0.75).unwrap();
    assert_eq!(phi_eval(&cvar, 3.0), ExtendedReal::Finite(0.0));
    assert_eq!(phi_eval(&cvar, 4.5), ExtendedReal::PosInfinity);
    for spec in DivergenceSpec::catalog() {
        assert_eq!(phi_eval(&spec, 1.0), ExtendedReal::Finite(0.0), "{spec}");
    }
}

#[test]
fn conjugate_values() {
    assert_eq!(finite(phi_conj_eval(&DivergenceSpec::kl(), 0.0)), 0.0);
    assert_eq!(phi_conj_eval(&DivergenceSpec::tvd_extended(), 2.0), ExtendedReal::PosInfinity);
    assert_eq!(finite(phi_conj_eval(&DivergenceSpec::pearson_chi2_extended(), 2.0)), 3.0);
    let interval = DivergenceSpec::interval_indicator(0.5, 2.0).unwrap();
    assert_eq!(finite(phi_conj_eval(&interval, -1.0)), -0.5);
}

#[test]
fn conjugate_subgradients() {
    let s = phi_conj_subgrad(&DivergenceSpec::pearson_chi2_extended(), 2.0).unwrap();
    assert_eq!((s.lower, s.upper), (2.0, 2.0));
    let interval = DivergenceSpec::interval_indicator(0.5, 2.0).unwrap();
    let s = phi_conj_subgrad(&interval, 0.0).unwrap();
    assert_eq!((s.lower, s.upper), (0.5, 2.0));
    let s = phi_conj_subgrad(&DivergenceSpec::kl(), 0.0).unwrap();
    assert_eq!((s.lower, s.upper), (1.0, 1.0));
    assert!(matches!(phi_conj_subgrad(&DivergenceSpec::tvd_extended(), 2.0), Err(QuadError::Domain(_))));
}

#[test]
fn oracle_examples() {
    let wide = GridRange::new(-10.0, 10.0, 1e-3);
    assert!((conjugate_oracle(&DivergenceSpec::pearson_chi2_extended(), 2.0, &wide) - 3.0).abs() <= 1e-3);
    let pos = GridRange::new(1e-4, 10.0, 1e-4);
    assert!(conjugate_oracle(&DivergenceSpec::kl(), 0.0, &pos).abs() <= 1e-4);
    let half = GridRange::new(0.0, 10.0, 1e-3);
    assert!((conjugate_oracle(&DivergenceSpec::tvd(), 0.5, &half) - 0.5).abs() <= 1e-3);
}

#[test]
fn oracle_matches_conjugate_on_probes() {
    for spec in DivergenceSpec::catalog() {
        let grid = if spec.is_extended() {
            GridRange::new(-10.0, 10.0, 1e-3)
        } else {
            GridRange::new(0.0, 10.0, 1e-3)
        };
        for z in conj_probes(&spec) {
            let exact = finite(phi_conj_eval(&spec, z));
            let brute = conjugate_oracle(&spec, z, &grid);
            assert!((exact - brute).abs() <= 1e-3, "{spec} z={z}: {exact} vs {brute}");
        }
    }
}

#[test]
fn validation_reports() {
    for spec in DivergenceSpec::catalog() {
        let r = validate_spec(&spec);
        assert!(r.all_passed(), "{r:?}");
        assert_eq!(r.extended, spec.is_extended());
    }
    let chi = DivergenceSpec::pearson_chi2_extended();
    assert!(validate_spec(&chi).extended);
    assert!(phi_eval(&chi, -1.0).is_finite());
    let broken = validate_phi("shifted", false, |x| {
        if x < 0.0 {
            ExtendedReal::PosInfinity
        } else {
            ExtendedReal::Finite((x - 1.0).powi(2) + 0.1)
        }
    });
    assert!(!broken.check("phi(1) = 0").unwrap().passed);
}

#[test]
fn extended_flags() {
    let extended: Vec<bool> = DivergenceSpec::catalog().iter().map(|s| s.is_extended()).collect();
    assert_eq!(extended, vec![false, false, true, false, true, false, true, false]);
    for spec in DivergenceSpec::catalog().iter().filter(|s| !s.is_extended()) {
        for x in [-0.01, -0.5, -3.0] {
            assert_eq!(phi_eval(spec, x), ExtendedReal::PosInfinity, "{spec}");
        }
    }
}

#[test]
fn spec_names_round_trip() {
    for spec in DivergenceSpec::catalog() {
        let parsed: DivergenceSpec = spec.name().parse().unwrap();
        assert_eq!(parsed, spec);
    }
    for bad in ["", "kl:x", "indicator_cvar", "indicator_cvar:alpha=1.5", "interval_indicator:a=2,b=3", "kl:foo=1"] {
        assert!(bad.parse::<DivergenceSpec>().is_err(), "{bad}");
    }
}

#[test]
fn extended_real_arithmetic() {
    let a = ExtendedReal::Finite(1.5);
    assert_eq!(a + ExtendedReal::Finite(2.0), ExtendedReal::Finite(3.5));
    assert_eq!(a + ExtendedReal::PosInfinity, ExtendedReal::PosInfinity);
    assert_eq!(ExtendedReal::PosInfinity.scale(3.0), ExtendedReal::PosInfinity);
    assert_eq!(a.scale(2.0), ExtendedReal::Finite(3.0));
}

proptest! {
    #[test]
    fn fenchel_young(spec in catalog_strategy(), x in -4.0f64..6.0, z in -3.0f64..3.0) {
        let (p, c) = (phi_eval(&spec, x), phi_conj_eval(&spec, z));
        if let (Some(p), Some(c)) = (p.finite(), c.finite()) {
            prop_assert!(p + c >= x * z - 1e-9, "{} x={} z={}: {} < {}", spec, x, z, p + c, x * z);
        }
    }

    #[test]
    fn fenchel_young_equality_on_subgradient(spec in catalog_strategy(), z in -3.0f64..3.0) {
        let c = phi_conj_eval(&spec, z);
        if let Some(c) = c.finite() {
            let s = phi_conj_subgrad(&spec, z).unwrap();
            for x in [s.lower, s.upper] {
                let p = finite(phi_eval(&spec, x));
                prop_assert!((p + c - x * z).abs() <= 1e-9 * (1.0 + (x * z).abs()), "{} z={} x={}", spec, z, x);
            }
        }
    }

    #[test]
    fn subgradient_monotone(spec in catalog_strategy(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let (z1, z2) = if a <= b { (a, b) } else { (b, a) };
        if let (Ok(s1), Ok(s2)) = (phi_conj_subgrad(&spec, z1), phi_conj_subgrad(&spec, z2)) {
            prop_assert!(s1.lower <= s1.upper);
            if z1 < z2 {
                prop_assert!(s1.upper <= s2.lower + 1e-12, "{} {} {}", spec, z1, z2);
            }
        }
    }

    #[test]
    fn non_extended_conjugate_nondecreasing(spec in catalog_strategy(), a in -5.0f64..3.0, d in 0.0f64..2.0) {
        prop_assume!(!spec.is_extended());
        let (lo, hi) = (phi_conj_eval(&spec, a).to_f64(), phi_conj_eval(&spec, a + d).to_f64());
        prop_assert!(lo <= hi + 1e-12);
    }
}
