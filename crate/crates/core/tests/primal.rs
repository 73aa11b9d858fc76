mod common;

use common::{grid_min, pool, sorted_cvar, uniform};
use phiquad::primal::{
    primal_deviation, primal_error, primal_quadrangle, primal_regret, primal_risk, primal_statistic,
};
use phiquad::{DivergenceSpec, EmpiricalDistribution};

const BETAS: [f64; 3] = [0.05, 0.5, 1.0];

#[test]
fn risk_examples() {
    let r = primal_risk(&DivergenceSpec::pearson_chi2_extended(), 1.0, &uniform(&[0.0, 2.0])).unwrap();
    assert!((r.value - 2.0).abs() < 1e-9);
    assert!((r.t - 0.5).abs() < 1e-6);
    assert!((r.location - 1.0).abs() < 1e-6);
    assert!((r.c - r.location / r.t).abs() < 1e-12);
    let x = uniform(&[1.0, 2.0, 3.0, 4.0]);
    let cvar = DivergenceSpec::indicator_cvar(0.75).unwrap();
    assert!((primal_risk(&cvar, 1.0, &x).unwrap().value - 4.0).abs() < 1e-9);
    assert!((primal_risk(&DivergenceSpec::tvd(), 1.0, &x).unwrap().value - 3.75).abs() < 1e-9);
    for spec in DivergenceSpec::catalog() {
        for beta in BETAS {
            let c = EmpiricalDistribution::constant(-1.25);
            assert_eq!(primal_risk(&spec, beta, &c).unwrap().value, -1.25, "{spec}");
            assert_eq!(primal_deviation(&spec, beta, &c).unwrap().value, 0.0);
        }
    }
}

#[test]
fn regret_examples() {
    let zero = EmpiricalDistribution::constant(0.0);
    for spec in DivergenceSpec::catalog() {
        // The scale floor leaves `T_MIN·β` for divergences whose regret needs t → 0.
        assert!(primal_regret(&spec, 0.5, &zero).unwrap().value.abs() < 1e-8, "{spec}");
        assert!(primal_error(&spec, 0.5, &zero).unwrap().value.abs() < 1e-8, "{spec}");
    }
    let x = uniform(&[0.0, 2.0]);
    let chi = DivergenceSpec::pearson_chi2_extended();
    assert!((primal_regret(&chi, 1.0, &x).unwrap().value - (1.0 + 2f64.sqrt())).abs() < 1e-9);
    assert!((primal_error(&chi, 1.0, &x).unwrap().value - 2f64.sqrt()).abs() < 1e-9);

    let y = uniform(&[-1.0, 1.0]);
    let f = |t: f64| t * (0.1 + y.expect(|v| (v / t).exp() - 1.0));
    let (_, oracle) = grid_min(f, 1e-3, 20.0, 20000);
    let v = primal_regret(&DivergenceSpec::kl(), 0.1, &y).unwrap().value;
    assert!((v - oracle).abs() <= 1e-8, "{v} {oracle}");

    let cvar = DivergenceSpec::indicator_cvar(0.75).unwrap();
    assert!((primal_error(&cvar, 0.3, &y).unwrap().value - 2.0).abs() < 1e-9);
}

#[test]
fn deviation_and_statistic_examples() {
    let range = DivergenceSpec::tvd_extended();
    let y = uniform(&[-1.0, 3.0]);
    assert!((primal_deviation(&range, 1.0, &y).unwrap().value - 2.0).abs() < 1e-9);
    let (lo, hi) = primal_statistic(&range, 1.0, &y).unwrap();
    assert!((lo - 1.0).abs() < 1e-7 && (hi - 1.0).abs() < 1e-7);
    let x = uniform(&[0.0, 2.0]);
    let chi = DivergenceSpec::pearson_chi2_extended();
    assert!((primal_deviation(&chi, 4.0, &x).unwrap().value - 2.0).abs() < 1e-9);
    let (lo, hi) = primal_statistic(&chi, 1.0, &x).unwrap();
    assert!((lo - 1.0).abs() < 1e-7 && (hi - 1.0).abs() < 1e-7);
    let half = DivergenceSpec::indicator_cvar(0.5).unwrap();
    let (lo, hi) = primal_statistic(&half, 0.7, &uniform(&[1.0, 2.0, 3.0, 4.0])).unwrap();
    assert!((lo - 2.0).abs() < 1e-9 && (hi - 3.0).abs() < 1e-9);
}

#[test]
fn identities_aversity_and_scaling() {
    for x in pool(21, 100) {
        for spec in DivergenceSpec::catalog() {
            for beta in BETAS {
                let q = primal_quadrangle(&spec, beta, &x).unwrap();
                let mean = x.expectation();
                assert!((q.risk - q.deviation - mean).abs() <= 1e-7);
                assert!((q.regret - q.error - mean).abs() <= 1e-7);
                assert!(q.risk > mean + 1e-9, "{spec} {beta} {x:?}");
                assert!(q.error > 1e-9, "{spec} {beta} {x:?}");
                assert!(q.statistic_lo <= q.statistic_hi);
                if spec.is_homogeneous() {
                    let other = primal_risk(&spec, 3.0 * beta, &x).unwrap().value;
                    assert!((other - q.risk).abs() <= 1e-9, "{spec}");
                }
                let larger = primal_risk(&spec, 2.0 * beta, &x).unwrap().value;
                assert!(larger >= q.risk - 1e-9, "{spec} {beta}");
            }
            if spec == DivergenceSpec::indicator_cvar(0.75).unwrap() {
                let r = primal_risk(&spec, 0.5, &x).unwrap().value;
                assert!((r - sorted_cvar(&x, 0.75)).abs() <= 1e-8);
            }
        }
    }
}

#[test]
fn extended_dominates() {
    for x in pool(22, 100) {
        for beta in [0.05, 0.5, 1.0, 1.5] {
            let chi = primal_risk(&DivergenceSpec::pearson_chi2(), beta, &x).unwrap().value;
            let chi_ext = primal_risk(&DivergenceSpec::pearson_chi2_extended(), beta, &x).unwrap().value;
            assert!(chi <= chi_ext + 1e-7);
            let tvd = primal_risk(&DivergenceSpec::tvd(), beta, &x).unwrap().value;
            let range = primal_risk(&DivergenceSpec::tvd_extended(), beta, &x).unwrap().value;
            assert!(tvd <= range + 1e-7);
        }
    }
}

/// Certainty equivalence and error projection with the minimum over C re-solved on a grid.
#[test]
fn certainty_equivalence_and_projection() {
    for x in pool(23, 12) {
        let (lo, hi) = (x.ess_inf() - 1.0, x.ess_sup() + 1.0);
        for spec in DivergenceSpec::catalog() {
            for beta in BETAS {
                let q = primal_quadrangle(&spec, beta, &x).unwrap();
                let ce = |c: f64| c + primal_regret(&spec, beta, &x.shift(-c)).unwrap().value;
                let (_, min_ce) = grid_min(ce, lo, hi, 60);
                assert!((min_ce - q.risk).abs() <= 1e-5, "{spec} {beta}: {min_ce} vs {}", q.risk);
                let proj = |c: f64| primal_error(&spec, beta, &x.shift(-c)).unwrap().value;
                let (_, min_err) = grid_min(proj, lo, hi, 60);
                assert!((min_err - q.deviation).abs() <= 1e-5, "{spec} {beta}");
            }
        }
    }
}
