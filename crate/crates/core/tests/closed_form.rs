mod common;

use common::{grid_min, pool, sorted_cvar, uniform};
use phiquad::closed_form::{
    chi2_alpha, chi2_quadrangle, closed_form, closed_form_regret, evar_quadrangle, expectile_quadrangle,
    interval_alpha, interval_indicator_quadrangle, mean_quadrangle, quantile_quadrangle, range_quadrangle,
    tvd_quadrangle, tvd_tail_level,
};
use phiquad::primal::{primal_error, primal_quadrangle, primal_risk};
use phiquad::{DivergenceSpec, EmpiricalDistribution, QuadrangleResult};

const SQRT2: f64 = std::f64::consts::SQRT_2;

fn assert_close(got: f64, want: f64, tol: f64, what: &str) {
    assert!((got - want).abs() <= tol, "{what}: {got} vs {want}");
}

fn constant_checks(q: &QuadrangleResult, c: f64) {
    assert_close(q.risk, c, 1e-12, "risk");
    assert_close(q.deviation, 0.0, 1e-12, "deviation");
    assert_close(q.statistic_lo, c, 1e-12, "statistic");
    assert_close(q.statistic_hi, c, 1e-12, "statistic");
}

#[test]
fn mean_quadrangle_values() {
    let q = mean_quadrangle(1.0, &uniform(&[0.0, 2.0])).unwrap();
    assert_close(q.risk, 2.0, 1e-15, "R");
    assert_close(q.deviation, 1.0, 1e-15, "D");
    assert_close(q.regret, 1.0 + SQRT2, 1e-15, "V");
    assert_close(q.error, SQRT2, 1e-15, "E");
    assert_close(q.statistic_mid(), 1.0, 1e-15, "S");
    constant_checks(&mean_quadrangle(0.7, &EmpiricalDistribution::constant(3.0)).unwrap(), 3.0);
    assert_close(mean_quadrangle(4.0, &uniform(&[0.0, 2.0])).unwrap().deviation, 2.0, 1e-15, "D");
}

#[test]
fn quantile_quadrangle_values() {
    let q = quantile_quadrangle(0.75, &uniform(&[1.0, 2.0, 3.0, 4.0])).unwrap();
    assert_close(q.risk, 4.0, 1e-15, "R");
    assert_close(q.deviation, 1.5, 1e-15, "D");
    assert_close(quantile_quadrangle(0.75, &uniform(&[-1.0, 1.0])).unwrap().error, 2.0, 1e-15, "E");
    constant_checks(&quantile_quadrangle(0.3, &EmpiricalDistribution::constant(-2.0)).unwrap(), -2.0);
    for x in pool(41, 40) {
        assert_eq!(quantile_quadrangle(0.6, &x).unwrap().risk, x.cvar(0.6));
    }
}

#[test]
fn range_quadrangle_values() {
    let x = uniform(&[-1.0, 3.0]);
    let q = range_quadrangle(1.0, &x).unwrap();
    assert_close(q.deviation, 2.0, 1e-15, "D");
    assert_close(q.statistic_mid(), 1.0, 1e-15, "S");
    assert_close(q.error, 3.0, 1e-15, "E");
    constant_checks(&range_quadrangle(1.3, &EmpiricalDistribution::constant(5.0)).unwrap(), 5.0);
    assert_close(range_quadrangle(0.5, &x).unwrap().risk, 2.0, 1e-15, "R");
}

#[test]
fn evar_limits() {
    constant_checks(&evar_quadrangle(0.4, &EmpiricalDistribution::constant(1.5)).unwrap(), 1.5);
    // The gap at small β is about √(2β)·σ, so σ must stay below ~0.7 for the 1e-3 check.
    let x = uniform(&[0.0, 1.0]);
    assert_close(evar_quadrangle(1e-6, &x).unwrap().risk, x.expectation(), 1e-3, "small beta");
    assert_close(evar_quadrangle(20.0, &uniform(&[-1.0, 1.0])).unwrap().risk, 1.0, 1e-3, "large beta");
}

#[test]
fn tvd_values_and_limits() {
    let x = uniform(&[1.0, 2.0, 3.0, 4.0]);
    assert_close(tvd_quadrangle(1.0, &x).unwrap().risk, 3.75, 1e-12, "R");
    assert_close(tvd_quadrangle(1e-8, &x).unwrap().risk, x.expectation(), 1e-6, "small beta");
    constant_checks(&tvd_quadrangle(0.5, &EmpiricalDistribution::constant(0.25)).unwrap(), 0.25);
    assert_eq!(tvd_tail_level(1.0), 0.5);
}

#[test]
fn chi2_values() {
    constant_checks(&chi2_quadrangle(2.0, &EmpiricalDistribution::constant(-1.0)).unwrap(), -1.0);
    let x = uniform(&[0.0, 2.0]);
    assert_close(chi2_alpha(3.0), 0.5, 1e-15, "alpha");
    let q = chi2_quadrangle(3.0, &x).unwrap();
    let p = primal_risk(&DivergenceSpec::pearson_chi2(), 3.0, &x).unwrap().value;
    assert_close(q.risk, p, 1e-5, "R vs primal");
    let s = chi2_quadrangle(1.0, &x).unwrap().statistic_mid();
    let alpha = chi2_alpha(1.0);
    assert_close(x.second_order_ratio(s), 1.0 - alpha, 1e-10, "S residual");
}

#[test]
fn expectile_values() {
    for x in pool(42, 20) {
        for beta in [0.3, 1.0, 2.0] {
            let e = expectile_quadrangle(0.5, beta, &x).unwrap();
            let m = mean_quadrangle(beta / 2.0, &x).unwrap();
            for (a, b) in [(e.risk, m.risk), (e.deviation, m.deviation), (e.regret, m.regret), (e.error, m.error)] {
                assert_close(a, b, 1e-9, "q = 0.5 reduction");
            }
            assert_close(e.statistic_mid(), m.statistic_mid(), 1e-9, "statistic");
        }
    }
    constant_checks(&expectile_quadrangle(0.8, 1.0, &EmpiricalDistribution::constant(2.0)).unwrap(), 2.0);
    let x = uniform(&[0.0, 2.0]);
    let q = expectile_quadrangle(0.75, 1.0, &x).unwrap();
    // q weights the positive part, matching the expectile balance q·E[(X−C)₊] = (1−q)·E[(X−C)₋].
    assert_close(q.error, (0.75 * 0.5 * 4.0f64).sqrt(), 1e-12, "E formula");
    let spec = DivergenceSpec::generalized_chi2_expectile(0.75).unwrap();
    assert_close(q.error, primal_error(&spec, 1.0, &x).unwrap().value, 1e-6, "E vs primal");
}

#[test]
fn interval_indicator_values() {
    let q = interval_indicator_quadrangle(0.5, 2.0, &uniform(&[-1.0, 1.0])).unwrap();
    assert_close(q.error, 0.75, 1e-15, "E");
    let x = uniform(&[1.0, -2.0, 0.5, 4.0, 3.0]);
    let alpha = 0.6;
    let b = 1.0 / (1.0 - alpha);
    assert_close(interval_alpha(1e-6, b), alpha, 1e-6, "level");
    assert_close(interval_indicator_quadrangle(1e-6, b, &x).unwrap().risk, sorted_cvar(&x, alpha), 1e-5, "a → 0");
    constant_checks(&interval_indicator_quadrangle(0.3, 3.0, &EmpiricalDistribution::constant(7.0)).unwrap(), 7.0);
}

#[test]
fn matches_primal_on_pool() {
    for x in pool(43, 40) {
        for spec in DivergenceSpec::catalog() {
            for beta in [0.05, 0.5, 1.0] {
                let c = closed_form(&spec, beta, &x).unwrap();
                let p = primal_quadrangle(&spec, beta, &x).unwrap();
                for (a, b, what) in [
                    (c.risk, p.risk, "risk"),
                    (c.deviation, p.deviation, "deviation"),
                    (c.regret, p.regret, "regret"),
                    (c.error, p.error, "error"),
                    (c.statistic_lo, p.statistic_lo, "statistic_lo"),
                    (c.statistic_hi, p.statistic_hi, "statistic_hi"),
                ] {
                    assert!((a - b).abs() <= 1e-5, "{spec} {beta} {what}: {a} vs {b}");
                }
            }
        }
    }
}

#[test]
fn closed_quartets_satisfy_identities() {
    for x in pool(44, 15) {
        for spec in DivergenceSpec::catalog() {
            for beta in [0.05, 0.5, 1.0] {
                let q = closed_form(&spec, beta, &x).unwrap();
                let mean = x.expectation();
                assert_close(q.risk - q.deviation, mean, 1e-7, "centerness R");
                assert_close(q.regret - q.error, mean, 1e-7, "centerness V");
                let err = |c: f64| {
                    let z = x.shift(-c);
                    closed_form_regret(&spec, beta, &z).unwrap().0 - z.expectation()
                };
                let (lo, hi) = (x.ess_inf() - 1.0, x.ess_sup() + 1.0);
                let (_, min_err) = grid_min(err, lo, hi, 400);
                assert_close(min_err, q.deviation, 1e-7, &format!("{spec} {beta} projection"));
                assert_close(err(q.statistic_mid()), q.deviation, 1e-7, &format!("{spec} {beta} statistic"));
            }
        }
    }
}
