mod common;

use common::{pool, uniform};
use phiquad::closed_form::closed_form_risk;
use phiquad::dual::{
    dual_deviation_oracle, dual_error_oracle, dual_regret_oracle, dual_risk_oracle, error_identifier_from_primal,
    risk_identifier_from_primal, MAX_ORACLE_ATOMS,
};
use phiquad::primal::{primal_regret, primal_risk, primal_statistic};
use phiquad::{DivergenceSpec, EmpiricalDistribution, QuadError};

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

#[test]
fn oracle_examples() {
    let x = uniform(&[0.0, 2.0]);
    let chi = DivergenceSpec::pearson_chi2_extended();
    let s = dual_risk_oracle(&chi, 1.0, &x).unwrap();
    assert!((s.value - 2.0).abs() < 1e-6);
    assert!(close(&s.identifier.weights, &[0.0, 2.0], 1e-4), "{:?}", s.identifier);
    assert!((s.identifier.mean_weight - 1.0).abs() < 1e-9);
    assert!((s.identifier.divergence_value - 1.0).abs() < 1e-6);
    assert!((dual_regret_oracle(&chi, 1.0, &x).unwrap().value - (1.0 + 2f64.sqrt())).abs() < 1e-6);
    assert!((dual_deviation_oracle(&chi, 1.0, &x).unwrap().value - 1.0).abs() < 1e-6);

    let half = DivergenceSpec::indicator_cvar(0.5).unwrap();
    let s = dual_risk_oracle(&half, 0.4, &uniform(&[1.0, 2.0, 3.0, 4.0])).unwrap();
    assert!((s.value - 3.5).abs() < 1e-6);
    assert!(close(&s.identifier.weights, &[0.0, 0.0, 2.0, 2.0], 1e-4), "{:?}", s.identifier);

    let range = DivergenceSpec::tvd_extended();
    assert!((dual_regret_oracle(&range, 1.0, &uniform(&[-1.0, 3.0])).unwrap().value - 4.0).abs() < 1e-6);

    for spec in DivergenceSpec::catalog() {
        let c = EmpiricalDistribution::constant(2.5);
        assert!((dual_risk_oracle(&spec, 0.5, &c).unwrap().value - 2.5).abs() < 1e-12);
        assert!(dual_deviation_oracle(&spec, 0.5, &c).unwrap().value.abs() < 1e-12);
        let zero = EmpiricalDistribution::constant(0.0);
        assert!(dual_regret_oracle(&spec, 0.5, &zero).unwrap().value.abs() < 1e-12);
        assert!(dual_error_oracle(&spec, 0.5, &zero).unwrap().value.abs() < 1e-12);
    }
}

#[test]
fn atom_limit_is_enforced() {
    let x = uniform(&(0..=MAX_ORACLE_ATOMS).map(|i| i as f64).collect::<Vec<_>>());
    assert!(matches!(dual_risk_oracle(&DivergenceSpec::kl(), 1.0, &x), Err(QuadError::AtomLimit { .. })));
}

#[test]
fn deviation_is_covariance() {
    for x in pool(31, 10) {
        for spec in DivergenceSpec::catalog() {
            let s = dual_deviation_oracle(&spec, 0.5, &x).unwrap();
            let q = &s.identifier.weights;
            let (mx, mq) = (x.expectation(), s.identifier.mean_weight);
            let cov: f64 = x.values().iter().zip(q).zip(x.probs()).map(|((v, w), p)| p * (v - mx) * (w - mq)).sum();
            assert!((cov - s.value).abs() <= 1e-7, "{spec}");
        }
    }
}

#[test]
fn strong_duality_sample() {
    for x in pool(32, 10).into_iter().filter(|x| x.len() <= 5) {
        for spec in DivergenceSpec::catalog() {
            for beta in [0.05, 0.5, 1.0] {
                let r = primal_risk(&spec, beta, &x).unwrap().value;
                let v = primal_regret(&spec, beta, &x).unwrap().value;
                assert!((dual_risk_oracle(&spec, beta, &x).unwrap().value - r).abs() <= 1e-4, "{spec} {beta}");
                assert!((dual_regret_oracle(&spec, beta, &x).unwrap().value - v).abs() <= 1e-4, "{spec} {beta}");
            }
        }
    }
}

#[test]
fn identifier_examples() {
    let x = uniform(&[0.0, 2.0]);
    let chi = DivergenceSpec::pearson_chi2_extended();
    let r = primal_risk(&chi, 1.0, &x).unwrap();
    let id = risk_identifier_from_primal(&chi, 1.0, &x, r.c, r.t).unwrap();
    assert!(close(&id.weights, &[0.0, 2.0], 1e-6), "{id:?}");

    let kl = DivergenceSpec::kl();
    let y = uniform(&[-1.0, 0.5, 2.0]);
    let r = primal_risk(&kl, 0.3, &y).unwrap();
    let id = risk_identifier_from_primal(&kl, 0.3, &y, r.c, r.t).unwrap();
    for (w, v) in id.weights.iter().zip(y.values()) {
        assert!(*w > 0.0);
        assert!((w - (v / r.t - r.c).exp()).abs() <= 1e-6 * w.max(1.0), "{w} {v}");
    }

    let c = EmpiricalDistribution::constant(4.0);
    let id = risk_identifier_from_primal(&kl, 0.3, &c, 0.0, 1.0).unwrap();
    assert_eq!(id.weights, vec![1.0]);
}

#[test]
fn error_identifier_examples() {
    let zero = uniform(&[0.0, 0.0]);
    let chi = DivergenceSpec::pearson_chi2_extended();
    let id = error_identifier_from_primal(&chi, 1.0, &zero, 0.5).unwrap();
    assert!(id.divergence_value <= 1.0 + 1e-12);
    assert_eq!(id.attained_objective, 0.0);

    let centred = uniform(&[-1.0, 1.0]);
    let v = primal_regret(&chi, 1.0, &centred).unwrap();
    let id = error_identifier_from_primal(&chi, 1.0, &centred, v.t).unwrap();
    assert!(close(&id.weights, &[0.0, 2.0], 1e-6), "{id:?}");
    assert!((id.mean_weight - 1.0).abs() < 1e-6);

    let cvar = DivergenceSpec::indicator_cvar(0.75).unwrap();
    let x = uniform(&[-1.0, 1.0]);
    let (lo, hi) = primal_statistic(&cvar, 1.0, &x).unwrap();
    let shifted = x.shift(-0.5 * (lo + hi));
    let v = primal_regret(&cvar, 1.0, &shifted).unwrap();
    let id = error_identifier_from_primal(&cvar, 1.0, &shifted, v.t).unwrap();
    assert!(id.weights.iter().all(|w| (-1e-12..=4.0 + 1e-12).contains(w)), "{id:?}");
    assert!((id.mean_weight - 1.0).abs() < 1e-6, "{id:?}");
}

#[test]
fn identifiers_feasible_and_optimal() {
    for x in pool(33, 40) {
        for spec in DivergenceSpec::catalog() {
            for beta in [0.05, 0.5, 1.0] {
                let r = primal_risk(&spec, beta, &x).unwrap();
                let id = risk_identifier_from_primal(&spec, beta, &x, r.c, r.t).unwrap();
                assert!(id.violations(&spec, beta, true, 1e-7).is_empty(), "{spec} {beta} {id:?}");
                assert!((id.attained_objective - r.value).abs() <= 1e-6, "{spec} {beta}");
            }
        }
    }
}

#[test]
fn negative_weights_only_when_extended() {
    let x = uniform(&[-4.0, 0.0, 0.5, 1.0]);
    let chi = DivergenceSpec::pearson_chi2_extended();
    let r = primal_risk(&chi, 4.0, &x).unwrap();
    let id = risk_identifier_from_primal(&chi, 4.0, &x, r.c, r.t).unwrap();
    assert!(id.weights.iter().any(|w| *w < 0.0), "{id:?}");
    for x in pool(34, 30) {
        for spec in DivergenceSpec::catalog().into_iter().filter(|s| !s.is_extended()) {
            for beta in [0.5, 4.0] {
                let r = primal_risk(&spec, beta, &x).unwrap();
                let id = risk_identifier_from_primal(&spec, beta, &x, r.c, r.t).unwrap();
                assert!(id.weights.iter().all(|w| *w >= -1e-9), "{spec} {id:?}");
            }
        }
    }
}

#[test]
fn small_radius_collapse() {
    for x in pool(35, 60) {
        for beta in [0.01, 0.001] {
            let a = closed_form_risk(&DivergenceSpec::pearson_chi2(), beta, &x).unwrap().0;
            let b = closed_form_risk(&DivergenceSpec::pearson_chi2_extended(), beta, &x).unwrap().0;
            assert!((a - b).abs() <= 1e-5, "{beta} {x:?}");
        }
    }
}
