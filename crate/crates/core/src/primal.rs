//! Primal quadrangle: risk, deviation, regret, error and statistic as low-dimensional
//! convex minimizations over the conjugate.
//!
//! Everything is computed in the jointly convex parametrization
//!
//! ```text
//! f(s, t) = s + t·β + E[ t·φ*((X − s)/t) ]
//! ```
//!
//! where `s` is the location (statistic scale) and `t > 0` the scale. The risk is
//! `inf f`, the statistic the set of minimizing `s`, and the regret is `f(0, ·)`
//! minimized over `t` without the leading `s`. The risk-scale shift reported as
//! `optimal_c` is `s/t`, so that `X/t − optimal_c = (X − s)/t`.
//!
//! The minimization is nested: for each location the scale is profiled out
//! (exactly for piecewise-linear conjugates, by grid plus golden section on
//! `ln t` otherwise), and the resulting convex profile is minimized over the
//! location.

use serde::{Deserialize, Serialize};

use crate::divergence::{conj, DivergenceKind, DivergenceSpec};
use crate::empirical::EmpiricalDistribution;
use crate::error::{QuadError, Result};
use crate::scalar::{bisect_boundary, scan_golden};

/// Lower end of the scale bracket; homogeneous conjugates report this scale.
pub const T_MIN: f64 = 1e-9;

/// All five quadrangle values plus optimizers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadrangleResult {
    pub spec_name: String,
    pub beta: f64,
    pub risk: f64,
    pub deviation: f64,
    pub regret: f64,
    pub error: f64,
    pub statistic_lo: f64,
    pub statistic_hi: f64,
    /// Scale attaining the risk.
    pub optimal_t: f64,
    /// Risk-scale shift, `statistic / optimal_t`.
    pub optimal_c: f64,
    /// Scale attaining the regret.
    pub regret_t: f64,
}

impl QuadrangleResult {
    pub fn statistic_interval(&self) -> (f64, f64) {
        (self.statistic_lo, self.statistic_hi)
    }

    pub fn statistic_mid(&self) -> f64 {
        0.5 * (self.statistic_lo + self.statistic_hi)
    }
}

/// Optimum of the risk (or deviation) problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskOptimum {
    pub value: f64,
    /// Risk-scale shift `location / t`.
    pub c: f64,
    pub t: f64,
    /// Minimizing location in statistic scale.
    pub location: f64,
}

/// Optimum of the regret (or error) problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegretOptimum {
    pub value: f64,
    pub t: f64,
}

pub(crate) fn check_beta(beta: f64) -> Result<()> {
    if beta.is_finite() && beta > 0.0 {
        Ok(())
    } else {
        Err(QuadError::InvalidInput(format!("beta must be positive and finite, got {beta}")))
    }
}

/// `t·β + E[t·φ*(d/t)]`, `+∞` when any atom leaves the conjugate's domain.
pub(crate) fn perspective_objective(spec: &DivergenceSpec, beta: f64, d: &[f64], p: &[f64], t: f64) -> f64 {
    let mut acc = t * beta;
    for (&di, &pi) in d.iter().zip(p) {
        let v = conj(spec, di / t);
        if !v.is_finite() {
            return f64::INFINITY;
        }
        acc += pi * t * v;
    }
    if acc.is_nan() {
        f64::INFINITY
    } else {
        acc
    }
}

/// `min_{t>0} t·β + E[t·φ*(d/t)]` and the minimizing scale.
pub(crate) fn profile_scale(spec: &DivergenceSpec, beta: f64, d: &[f64], p: &[f64]) -> (f64, f64) {
    if spec.is_homogeneous() {
        let v: f64 = d.iter().zip(p).map(|(&di, &pi)| pi * conj(spec, di)).sum();
        return (v, T_MIN);
    }
    match spec.kind() {
        DivergenceKind::Tvd | DivergenceKind::TvdExtended => {
            // Piecewise linear in t with breaks where some d/t hits ±1.
            let mut best = (perspective_objective(spec, beta, d, p, T_MIN), T_MIN);
            for &di in d {
                let t = di.abs();
                if t > T_MIN {
                    let v = perspective_objective(spec, beta, d, p, t);
                    if v < best.0 {
                        best = (v, t);
                    }
                }
            }
            best
        }
        _ => {
            let dmax = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let mut tmax = 10.0 * (1.0 + dmax);
            let mut found = scan_golden(|t| perspective_objective(spec, beta, d, p, t), T_MIN, tmax, 41, true, 1e-11);
            for _ in 0..4 {
                if !found.at_upper {
                    break;
                }
                tmax *= 10.0;
                found = scan_golden(|t| perspective_objective(spec, beta, d, p, t), T_MIN, tmax, 41, true, 1e-11);
            }
            (found.fx, found.x)
        }
    }
}

/// Profile of the risk objective at a location: `s + min_t f(s, t)` and its scale.
pub(crate) fn risk_profile(spec: &DivergenceSpec, beta: f64, x: &EmpiricalDistribution, s: f64) -> (f64, f64) {
    let d: Vec<f64> = x.values().iter().map(|v| v - s).collect();
    let (g, t) = profile_scale(spec, beta, &d, x.probs());
    (s + g, t)
}

/// Minimizing location of the risk profile with its value.
fn minimize_location(spec: &DivergenceSpec, beta: f64, x: &EmpiricalDistribution) -> Result<(f64, f64)> {
    let (lo, hi) = (x.ess_inf(), x.ess_sup());
    let span = hi - lo;
    let mut pad = span + 1.0;
    let xtol = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
    for _ in 0..12 {
        let m = scan_golden(|s| risk_profile(spec, beta, x, s).0, lo - pad, hi + pad, 41, false, xtol);
        if !m.fx.is_finite() {
            pad *= 4.0;
            continue;
        }
        if m.at_lower || m.at_upper {
            pad *= 4.0;
            continue;
        }
        return Ok((m.x, m.fx));
    }
    Err(QuadError::Unbounded(format!("{spec}: risk profile has no interior minimum")))
}

pub fn primal_risk(spec: &DivergenceSpec, beta: f64, x: &EmpiricalDistribution) -> Result<RiskOptimum> {
    check_beta(beta)?;
    if x.is_constant() {
        let c = x.values()[0];
        return Ok(RiskOptimum { value: c, c: c / T_MIN, t: T_MIN, location: c });
    }
    let (s, value) = minimize_location(spec, beta, x)?;
    let (_, t) = risk_profile(spec, beta, x, s);
    Ok(RiskOptimum { value, c: s / t, t, location: s })
}

pub fn primal_regret(spec: &DivergenceSpec, beta: f64, x: &EmpiricalDistribution) -> Result<RegretOptimum> {
    check_beta(beta)?;
    let (value, t) = profile_scale(spec, beta, x.values(), x.probs());
    if !value.is_finite() {
        return Err(QuadError::Unbounded(format!("{spec}: no finite regret")));
    }
    Ok(RegretOptimum { value, t })
}

pub fn primal_deviation(spec: &DivergenceSpec, beta: f64, x: &EmpiricalDistribution) -> Result<RiskOptimum> {
    let r = primal_risk(spec, beta, x)?;
    let value = if x.is_constant() { 0.0 } else { (r.value - x.expectation()).max(0.0) };
    Ok(RiskOptimum { value, ..r })
}

pub fn primal_error(spec: &DivergenceSpec, beta: f64, x: &EmpiricalDistribution) -> Result<RegretOptimum> {
    let r = primal_regret(spec, beta, x)?;
    Ok(RegretOptimum { value: r.value - x.expectation(), ..r })
}

/// Argmin interval of the risk profile over locations.
///
/// Smooth conjugates have a single minimizer, reported as a degenerate interval.
/// Otherwise the profile is piecewise linear and the flat bottom is located by
/// bisection on the sign of one-sided secant slopes.
pub fn primal_statistic(spec: &DivergenceSpec, beta: f64, x: &EmpiricalDistribution) -> Result<(f64, f64)> {
    check_beta(beta)?;
    if x.is_constant() {
        return Ok((x.values()[0], x.values()[0]));
    }
    let (s0, f0) = minimize_location(spec, beta, x)?;
    let profile = |s: f64| risk_profile(spec, beta, x, s).0;
    if spec.is_smooth() {
        // Strictly convex bottoms are the rule; a flat one shows up as no rise at ±w.
        let w = 1e-3 * (1.0 + x.ess_sup() - x.ess_inf());
        let tau = 1e-12 * (1.0 + f0.abs());
        if profile(s0 - w) - f0 > tau && profile(s0 + w) - f0 > tau {
            return Ok((s0, s0));
        }
    }
    Ok(flat_bottom(profile, s0, f0, x.ess_inf(), x.ess_sup()))
}

/// Ends of the flat bottom of a piecewise-linear convex `f` around its minimizer `s0`.
pub(crate) fn flat_bottom<F: Fn(f64) -> f64>(f: F, s0: f64, f0: f64, lo: f64, hi: f64) -> (f64, f64) {
    let span = hi - lo;
    let h = 1e-8 * (1.0 + span);
    let tau = 1e-13 * (1.0 + f0.abs() + span);
    let (a, b) = (lo - span - 1.0, hi + span + 1.0);
    let lower = bisect_boundary(|s| f(s + h) < f(s) - tau, a.min(s0), s0, 200);
    let upper = bisect_boundary(|s| f(s) <= f(s - h) + tau, s0, b.max(s0), 200);
    // A kink rather than a flat segment: the secant test is biased by h/2 there,
    // while the golden-section minimizer is not.
    if upper - lower <= 2.0 * h {
        return (s0, s0);
    }
    (lower.min(s0), upper.max(s0))
}

pub fn primal_quadrangle(spec: &DivergenceSpec, beta: f64, x: &EmpiricalDistribution) -> Result<QuadrangleResult> {
    let risk = primal_risk(spec, beta, x)?;
    let regret = primal_regret(spec, beta, x)?;
    let (statistic_lo, statistic_hi) = primal_statistic(spec, beta, x)?;
    let mean = x.expectation();
    Ok(QuadrangleResult {
        spec_name: spec.name(),
        beta,
        risk: risk.value,
        deviation: if x.is_constant() { 0.0 } else { (risk.value - mean).max(0.0) },
        regret: regret.value,
        error: regret.value - mean,
        statistic_lo,
        statistic_hi,
        optimal_t: risk.t,
        optimal_c: risk.c,
        regret_t: regret.t,
    })
}
