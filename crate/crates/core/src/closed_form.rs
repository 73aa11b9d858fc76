//! Closed-form quadrangles for every catalog entry.
//!
//! Each evaluator returns the five values together with the optimizers of the
//! risk problem (`optimal_t`, and the location as the statistic), so the fast
//! path can feed identifier extraction without running the primal solver.

use crate::divergence::{DivergenceKind, DivergenceSpec};
use crate::empirical::EmpiricalDistribution;
use crate::error::{QuadError, Result};
use crate::primal::{check_beta, QuadrangleResult, T_MIN};
use crate::scalar::{bisect_boundary, scan_golden};

/// Confidence level of the second-order superquantile: `√(1+β) = (1−α)⁻¹`.
pub fn chi2_alpha(beta: f64) -> f64 {
    1.0 - 1.0 / (1.0 + beta).sqrt()
}

/// Tail level of the CVaR inside the robustified supremum risk.
pub fn tvd_tail_level(beta: f64) -> f64 {
    beta / 2.0
}

/// CVaR level equivalent to the interval indicator `[a, b]`.
pub fn interval_alpha(a: f64, b: f64) -> f64 {
    (b - 1.0) / (b - a)
}

struct Parts {
    risk: f64,
    regret: f64,
    stat: (f64, f64),
    /// Risk scale and location.
    t: f64,
    s: f64,
    regret_t: f64,
}

fn assemble(name: String, beta: f64, x: &EmpiricalDistribution, mut p: Parts) -> QuadrangleResult {
    let mean = x.expectation();
    if x.is_constant() {
        let c = x.values()[0];
        p.risk = c;
        p.stat = (c, c);
        p.s = c;
    }
    let t = p.t.max(T_MIN);
    QuadrangleResult {
        spec_name: name,
        beta,
        risk: p.risk,
        deviation: if x.is_constant() { 0.0 } else { (p.risk - mean).max(0.0) },
        regret: p.regret,
        error: p.regret - mean,
        statistic_lo: p.stat.0,
        statistic_hi: p.stat.1,
        optimal_t: t,
        optimal_c: p.s / t,
        regret_t: p.regret_t.max(T_MIN),
    }
}

/// Mean quadrangle (extended Pearson χ²): mean plus scaled standard deviation.
pub fn mean_quadrangle(beta: f64, x: &EmpiricalDistribution) -> Result<QuadrangleResult> {
    check_beta(beta)?;
    let (m, sd, l2) = (x.expectation(), x.std_dev(), x.l2_norm());
    let rb = beta.sqrt();
    let parts = Parts {
        risk: m + rb * sd,
        regret: m + rb * l2,
        stat: (m, m),
        t: sd / (2.0 * rb),
        s: m,
        regret_t: l2 / (2.0 * rb),
    };
    Ok(assemble(DivergenceSpec::pearson_chi2_extended().name(), beta, x, parts))
}

/// Quantile quadrangle (CVaR indicator); independent of the radius.
pub fn quantile_quadrangle(alpha: f64, x: &EmpiricalDistribution) -> Result<QuadrangleResult> {
    let spec = DivergenceSpec::indicator_cvar(alpha)?;
    let stat = x.quantile_interval(alpha);
    let parts = Parts {
        risk: x.cvar(alpha),
        regret: x.expect(|v| v.max(0.0)) / (1.0 - alpha),
        stat,
        t: T_MIN,
        s: stat.0,
        regret_t: T_MIN,
    };
    Ok(assemble(spec.name(), f64::NAN, x, parts))
}

/// Range quadrangle (extended total variation).
pub fn range_quadrangle(beta: f64, x: &EmpiricalDistribution) -> Result<QuadrangleResult> {
    check_beta(beta)?;
    let (hi, lo) = (x.ess_sup(), x.ess_inf());
    let sup_abs = hi.abs().max(lo.abs());
    let mid = 0.5 * (hi + lo);
    let parts = Parts {
        risk: 0.5 * beta * (hi - lo) + x.expectation(),
        regret: beta * sup_abs + x.expectation(),
        stat: (mid, mid),
        t: 0.5 * (hi - lo),
        s: mid,
        regret_t: sup_abs,
    };
    Ok(assemble(DivergenceSpec::tvd_extended().name(), beta, x, parts))
}

/// `ln E[e^{(X − sup X)/t}]`, finite for every `t > 0`.
fn shifted_log_mgf(x: &EmpiricalDistribution, t: f64) -> f64 {
    let top = x.ess_sup();
    x.expect(|v| ((v - top) / t).exp()).ln()
}

/// Derivative in `t` of `t·(β + ln E[e^{X/t}])`; increasing in `t`.
fn evar_slope(beta: f64, x: &EmpiricalDistribution, t: f64) -> f64 {
    let top = x.ess_sup();
    let w = |v: f64| ((v - top) / t).exp();
    let mass = x.expect(w);
    let tilt = x.expect(|v| (v - top) * w(v)) / mass;
    beta + mass.ln() - tilt / t
}

/// Left side of the scalar equation for the optimal EVaR scale,
/// `t·β + t·ln E[e^{X/t}] − E[X e^{X/t}] / E[e^{X/t}]`.
pub fn evar_scale_equation(beta: f64, x: &EmpiricalDistribution, t: f64) -> f64 {
    t * evar_slope(beta, x, t)
}

/// Scale minimizing `t·(β + ln E[e^{X/t}])`; `T_MIN` when the infimum is the supremum of X.
pub fn evar_optimal_t(beta: f64, x: &EmpiricalDistribution) -> f64 {
    if x.is_constant() || evar_slope(beta, x, T_MIN) >= 0.0 {
        return T_MIN;
    }
    let span = x.ess_sup() - x.ess_inf();
    let mut hi = 1.0 + span;
    while evar_slope(beta, x, hi) < 0.0 && hi < 1e300 {
        hi *= 2.0;
    }
    let u = bisect_boundary(|u| evar_slope(beta, x, u.exp()) < 0.0, T_MIN.ln(), hi.ln(), 300);
    u.exp()
}

/// Scale minimizing `t·(β + E[e^{X/t} − 1])`.
fn kl_regret_t(beta: f64, x: &EmpiricalDistribution) -> f64 {
    // d/dt of the objective: β + E[(1 − z)e^z − 1] with z = X/t, increasing in t.
    let slope = |t: f64| {
        let v = beta
            + x.expect(|v| {
                let z = v / t;
                if z > 700.0 {
                    f64::NEG_INFINITY
                } else {
                    (1.0 - z) * z.exp() - 1.0
                }
            });
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    };
    if slope(T_MIN) >= 0.0 {
        return T_MIN;
    }
    let mut hi = 1.0 + x.ess_sup().abs().max(x.ess_inf().abs());
    while slope(hi) < 0.0 && hi < 1e300 {
        hi *= 2.0;
    }
    bisect_boundary(|u| slope(u.exp()) < 0.0, T_MIN.ln(), hi.ln(), 300).exp()
}

/// EVaR quadrangle (Kullback–Leibler).
pub fn evar_quadrangle(beta: f64, x: &EmpiricalDistribution) -> Result<QuadrangleResult> {
    check_beta(beta)?;
    let top = x.ess_sup();
    let t = evar_optimal_t(beta, x);
    // At the saturated scale the infimum is the supremum itself.
    let s = if t == T_MIN { top } else { top + t * shifted_log_mgf(x, t) };
    let risk = if t == T_MIN { top } else { t * beta + s };
    let vt = kl_regret_t(beta, x);
    let regret = vt * (beta + x.expect(|v| (v / vt).exp_m1()));
    let parts = Parts { risk, regret, stat: (s, s), t, s, regret_t: vt };
    Ok(assemble(DivergenceSpec::kl().name(), beta, x, parts))
}

/// Robustified supremum quadrangle (total variation, non-extended).
///
/// The level `β/2` saturates at 1 for `β ≥ 2`, where the risk is the supremum.
pub fn tvd_quadrangle(beta: f64, x: &EmpiricalDistribution) -> Result<QuadrangleResult> {
    check_beta(beta)?;
    let top = x.ess_sup();
    let level = tvd_tail_level(beta).min(1.0);
    let risk = 0.5 * beta.min(2.0) * top + (1.0 - level) * x.cvar(level);
    let (u_lo, u_hi) = if level >= 1.0 { (top, top) } else { x.quantile_interval(level) };
    let stat = (0.5 * (top + u_lo), 0.5 * (top + u_hi));
    // Regret: piecewise linear in t on t ≥ max(sup X, 0); breaks at t = −x.
    let floor = top.max(T_MIN);
    let regret_at = |t: f64| t * (beta - 1.0) + x.expect(|v| (v + t).max(0.0));
    let (mut regret, mut regret_t) = (regret_at(floor), floor);
    for &v in x.values() {
        if -v > floor {
            let r = regret_at(-v);
            if r < regret {
                regret = r;
                regret_t = -v;
            }
        }
    }
    let parts = Parts { risk, regret, stat, t: 0.5 * (top - u_lo), s: stat.0, regret_t };
    Ok(assemble(DivergenceSpec::tvd().name(), beta, x, parts))
}

/// Second-order superquantile quadrangle (Pearson χ², non-extended).
pub fn chi2_quadrangle(beta: f64, x: &EmpiricalDistribution) -> Result<QuadrangleResult> {
    check_beta(beta)?;
    let name = DivergenceSpec::pearson_chi2().name();
    // Regret: inf over t of t(β − 1) + E[(X + 2t)₊²]/(4t).
    let regret_obj = |t: f64| t * (beta - 1.0) + x.expect(|v| (v + 2.0 * t).max(0.0).powi(2)) / (4.0 * t);
    let tmax = 10.0 * (1.0 + x.ess_sup().abs().max(x.ess_inf().abs()));
    let reg = scan_golden(regret_obj, T_MIN, tmax, 61, true, 1e-12);
    if x.is_constant() {
        let c = x.values()[0];
        let parts = Parts { risk: c, regret: reg.fx, stat: (c, c), t: T_MIN, s: c, regret_t: reg.x };
        return Ok(assemble(name, beta, x, parts));
    }
    let alpha = chi2_alpha(beta);
    let tail_sq = |q: f64| x.expect(|v| (v - q).max(0.0).powi(2));
    let q = x.second_order_quantile(alpha)?;
    let t = (tail_sq(q) / (4.0 * (1.0 + beta))).sqrt();
    let s_of = |q: f64| q + (tail_sq(q) / (1.0 + beta)).sqrt();
    let s = s_of(q);
    // With a single atom above the quantile the defining ratio is flat and the
    // statistic is the image of the whole flat segment.
    let target = 1.0 - alpha;
    let top = x.ess_sup();
    let top_mass: f64 = x.values().iter().zip(x.probs()).filter(|(v, _)| **v == top).map(|(_, p)| p).sum();
    let stat = if (target - top_mass.sqrt()).abs() <= 1e-12 {
        let q_lo = bisect_boundary(|u| x.second_order_ratio(u) > target + 1e-14, x.ess_inf() - 1.0 - (top - x.ess_inf()), top, 200);
        (s_of(q_lo), top)
    } else {
        (s, s)
    };
    let parts = Parts {
        risk: q + ((1.0 + beta) * tail_sq(q)).sqrt(),
        regret: reg.fx,
        stat,
        t,
        s,
        regret_t: reg.x,
    };
    Ok(assemble(name, beta, x, parts))
}

/// `E[q·X₊² + (1−q)·X₋²]`.
fn asymmetric_second_moment(q: f64, x: &EmpiricalDistribution) -> f64 {
    x.expect(|v| if v > 0.0 { q * v * v } else { (1.0 - q) * v * v })
}

/// Expectile quadrangle (generalized Pearson χ²).
pub fn expectile_quadrangle(q: f64, beta: f64, x: &EmpiricalDistribution) -> Result<QuadrangleResult> {
    check_beta(beta)?;
    let spec = DivergenceSpec::generalized_chi2_expectile(q)?;
    let e = x.expectile(q);
    let a_centered = asymmetric_second_moment(q, &x.shift(-e));
    let a_raw = asymmetric_second_moment(q, x);
    let mean = x.expectation();
    let parts = Parts {
        risk: mean + (beta * a_centered).sqrt(),
        regret: mean + (beta * a_raw).sqrt(),
        stat: (e, e),
        t: (a_centered / (4.0 * beta)).sqrt(),
        s: e,
        regret_t: (a_raw / (4.0 * beta)).sqrt(),
    };
    Ok(assemble(spec.name(), beta, x, parts))
}

/// Quadrangle of the finite-interval indicator `[a, b]`; independent of the radius.
pub fn interval_indicator_quadrangle(a: f64, b: f64, x: &EmpiricalDistribution) -> Result<QuadrangleResult> {
    let spec = DivergenceSpec::interval_indicator(a, b)?;
    let level = interval_alpha(a, b);
    let stat = x.quantile_interval(level);
    let parts = Parts {
        risk: (1.0 - a) * x.cvar(level) + a * x.expectation(),
        regret: x.expect(|v| if v > 0.0 { b * v } else { a * v }),
        stat,
        t: T_MIN,
        s: stat.0,
        regret_t: T_MIN,
    };
    Ok(assemble(spec.name(), f64::NAN, x, parts))
}

/// Closed-form quadrangle of any catalog entry.
pub fn closed_form(spec: &DivergenceSpec, beta: f64, x: &EmpiricalDistribution) -> Result<QuadrangleResult> {
    check_beta(beta)?;
    let mut r = match spec.kind() {
        DivergenceKind::Kl => evar_quadrangle(beta, x),
        DivergenceKind::Tvd => tvd_quadrangle(beta, x),
        DivergenceKind::TvdExtended => range_quadrangle(beta, x),
        DivergenceKind::PearsonChi2 => chi2_quadrangle(beta, x),
        DivergenceKind::PearsonChi2Extended => mean_quadrangle(beta, x),
        DivergenceKind::IndicatorCvar { alpha } => quantile_quadrangle(alpha, x),
        DivergenceKind::GeneralizedChi2Expectile { q } => expectile_quadrangle(q, beta, x),
        DivergenceKind::IntervalIndicator { a, b } => interval_indicator_quadrangle(a, b, x),
    }?;
    r.beta = beta;
    Ok(r)
}

/// Risk value only; cheaper than the full quadrangle where the regret needs a search.
pub fn closed_form_risk(spec: &DivergenceSpec, beta: f64, x: &EmpiricalDistribution) -> Result<(f64, f64, f64)> {
    check_beta(beta)?;
    if x.is_constant() {
        return Ok((x.values()[0], x.values()[0], T_MIN));
    }
    let (risk, s, t) = match spec.kind() {
        DivergenceKind::Kl => {
            let t = evar_optimal_t(beta, x);
            if t == T_MIN {
                (x.ess_sup(), x.ess_sup(), t)
            } else {
                let s = x.ess_sup() + t * shifted_log_mgf(x, t);
                (t * beta + s, s, t)
            }
        }
        DivergenceKind::TvdExtended => {
            let (hi, lo) = (x.ess_sup(), x.ess_inf());
            (0.5 * beta * (hi - lo) + x.expectation(), 0.5 * (hi + lo), 0.5 * (hi - lo))
        }
        DivergenceKind::PearsonChi2Extended => {
            let (m, sd) = (x.expectation(), x.std_dev());
            (m + beta.sqrt() * sd, m, sd / (2.0 * beta.sqrt()))
        }
        DivergenceKind::IndicatorCvar { alpha } => (x.cvar(alpha), x.var(alpha), T_MIN),
        DivergenceKind::IntervalIndicator { a, b } => {
            let level = interval_alpha(a, b);
            ((1.0 - a) * x.cvar(level) + a * x.expectation(), x.var(level), T_MIN)
        }
        DivergenceKind::Tvd | DivergenceKind::PearsonChi2 | DivergenceKind::GeneralizedChi2Expectile { .. } => {
            let r = closed_form(spec, beta, x)?;
            (r.risk, r.optimal_c * r.optimal_t, r.optimal_t)
        }
    };
    if !risk.is_finite() {
        return Err(QuadError::Unbounded(format!("{spec}: closed-form risk is not finite")));
    }
    Ok((risk, s, t.max(T_MIN)))
}

/// Regret value and its scale, skipping the risk where that saves a search.
pub fn closed_form_regret(spec: &DivergenceSpec, beta: f64, x: &EmpiricalDistribution) -> Result<(f64, f64)> {
    check_beta(beta)?;
    match spec.kind() {
        DivergenceKind::Kl => {
            let vt = kl_regret_t(beta, x);
            Ok((vt * (beta + x.expect(|v| (v / vt).exp_m1())), vt))
        }
        DivergenceKind::PearsonChi2Extended => {
            let l2 = x.l2_norm();
            Ok((x.expectation() + beta.sqrt() * l2, (l2 / (2.0 * beta.sqrt())).max(T_MIN)))
        }
        _ => {
            let r = closed_form(spec, beta, x)?;
            Ok((r.regret, r.regret_t))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(v: &[f64]) -> EmpiricalDistribution {
        EmpiricalDistribution::uniform(v.to_vec()).unwrap()
    }

    #[test]
    fn mean_and_range() {
        let r = mean_quadrangle(1.0, &d(&[0.0, 2.0])).unwrap();
        assert_eq!((r.risk, r.deviation, r.statistic_lo), (2.0, 1.0, 1.0));
        assert!((r.regret - (1.0 + 2f64.sqrt())).abs() < 1e-15);
        assert!((r.error - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(mean_quadrangle(4.0, &d(&[0.0, 2.0])).unwrap().deviation, 2.0);
        let g = range_quadrangle(1.0, &d(&[-1.0, 3.0])).unwrap();
        assert_eq!((g.deviation, g.statistic_lo, g.error), (2.0, 1.0, 3.0));
        assert_eq!(range_quadrangle(0.5, &d(&[-1.0, 3.0])).unwrap().risk, 2.0);
    }

    #[test]
    fn quantile_and_interval() {
        let r = quantile_quadrangle(0.75, &d(&[1.0, 2.0, 3.0, 4.0])).unwrap();
        assert_eq!((r.risk, r.deviation), (4.0, 1.5));
        assert_eq!(quantile_quadrangle(0.75, &d(&[-1.0, 1.0])).unwrap().error, 2.0);
        let i = interval_indicator_quadrangle(0.5, 2.0, &d(&[-1.0, 1.0])).unwrap();
        assert!((i.error - 0.75).abs() < 1e-15);
        let x = d(&[0.3, -1.2, 2.5, 0.9]);
        let near = interval_indicator_quadrangle(1e-6, 4.0, &x).unwrap().risk;
        assert!((near - x.cvar(0.75)).abs() < 1e-5);
    }

    #[test]
    fn limits() {
        // The gap to the mean behaves like √(2β)·σ, so σ must stay below ~0.7 here.
        let x = d(&[0.0, 1.0]);
        assert!((evar_quadrangle(1e-6, &x).unwrap().risk - x.expectation()).abs() < 1e-3);
        let x = d(&[-1.0, 1.0]);
        assert!((evar_quadrangle(20.0, &x).unwrap().risk - 1.0).abs() < 1e-3);
        let y = d(&[1.0, 2.0, 3.0, 4.0]);
        assert!((tvd_quadrangle(1.0, &y).unwrap().risk - 3.75).abs() < 1e-15);
        assert!((tvd_quadrangle(1e-8, &y).unwrap().risk - 2.5).abs() < 1e-6);
    }

    #[test]
    fn constants() {
        let c = EmpiricalDistribution::constant(1.25);
        for spec in DivergenceSpec::catalog() {
            let r = closed_form(&spec, 0.5, &c).unwrap();
            assert_eq!(r.risk, 1.25, "{spec}");
            assert_eq!(r.deviation, 0.0);
            assert_eq!(r.statistic_interval(), (1.25, 1.25), "{spec}");
        }
    }
}
