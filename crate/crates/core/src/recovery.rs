//! Recovering the divergence of a weight vector from quadrangle elements.
//!
//! For a feasible weight vector `Q` (`E[Q] = 1`, `Q ≥ 0`)
//!
//! ```text
//! E[φ(Q)] = sup_X inf_{β>0} { E[XQ] − R_β(X) + β },
//! ```
//!
//! because `sup_β {R_β(X) − β}` is the optimized-certainty-equivalent risk,
//! whose conjugate is `E[φ(Q)]`. The deviation, regret and error routes replace
//! `R_β` by `E[X] + D_β`, `min_C {C + V_β(X − C)}` and `E[X] + min_C E_β(X − C)`.
//!
//! The supremum over `X` is a grid search (with the first atom pinned to zero,
//! since the bracket is translation invariant) followed by local refinement; the
//! infimum over `β` and the minimum over `C` are convex one-dimensional searches.
//! Grid maxima are lower bounds, so the recovered value never exceeds the truth
//! beyond search noise.

use serde::{Deserialize, Serialize};

use crate::closed_form::{closed_form, closed_form_regret, closed_form_risk};
use crate::divergence::{divergence_value, DivergenceSpec};
use crate::empirical::EmpiricalDistribution;
use crate::error::{QuadError, Result};
use crate::scalar::{golden, scan_golden};

/// Largest atom count accepted by the grid search.
pub const MAX_RECOVERY_ATOMS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RecoveryRoute {
    Risk,
    Deviation,
    Regret,
    Error,
}

impl RecoveryRoute {
    pub const ALL: [RecoveryRoute; 4] =
        [RecoveryRoute::Risk, RecoveryRoute::Deviation, RecoveryRoute::Regret, RecoveryRoute::Error];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recovery {
    pub route: RecoveryRoute,
    pub value: f64,
    /// Outcome vector attaining the grid supremum.
    pub maximizer: Vec<f64>,
    /// Radius attaining the inner infimum at the maximizer.
    pub beta: f64,
    /// The supremum sat on the outer edge of the outcome grid.
    pub grid_exhausted: bool,
}

struct Problem<'a> {
    spec: &'a DivergenceSpec,
    route: RecoveryRoute,
    weights: &'a [f64],
    probs: &'a [f64],
}

impl Problem<'_> {
    /// Convex minimization over a location, bracketed by the outcomes.
    fn min_over_location(&self, x: &EmpiricalDistribution, f: impl Fn(f64) -> Result<f64>) -> f64 {
        let (lo, hi) = (x.ess_inf(), x.ess_sup());
        let pad = hi - lo + 1.0;
        let g = |c: f64| f(c).unwrap_or(f64::INFINITY);
        golden(g, lo - pad, hi + pad, Some(0.5 * (lo + hi)), 1e-11 * (1.0 + pad)).1
    }

    /// `E[XQ] − R_β(X) + β` through the chosen quadrangle element.
    fn bracket(&self, x: &EmpiricalDistribution, beta: f64) -> f64 {
        let spec = self.spec;
        let xq: f64 = x.values().iter().zip(self.weights).zip(self.probs).map(|((v, q), p)| v * q * p).sum();
        let mean = x.expectation();
        let risk = match self.route {
            RecoveryRoute::Risk => closed_form_risk(spec, beta, x).map(|r| r.0).unwrap_or(f64::NAN),
            RecoveryRoute::Deviation => mean + closed_form(spec, beta, x).map(|q| q.deviation).unwrap_or(f64::NAN),
            RecoveryRoute::Regret => {
                self.min_over_location(x, |c| Ok(c + closed_form_regret(spec, beta, &x.shift(-c))?.0))
            }
            RecoveryRoute::Error => {
                mean + self.min_over_location(x, |c| {
                    let shifted = x.shift(-c);
                    Ok(closed_form_regret(spec, beta, &shifted)?.0 - shifted.expectation())
                })
            }
        };
        if risk.is_finite() {
            xq - risk + beta
        } else {
            f64::INFINITY
        }
    }

    /// `inf_β` of the bracket with the minimizing radius; `coarse` stops at the radius grid.
    fn inner(&self, x: &EmpiricalDistribution, coarse: bool) -> (f64, f64) {
        let (mut lo, mut hi) = (1e-3, 20.0);
        let xtol = if coarse { f64::INFINITY } else { 1e-10 };
        let mut found = scan_golden(|b| self.bracket(x, b), lo, hi, 40, true, xtol);
        for _ in 0..6 {
            if found.at_lower && lo > 1e-14 {
                lo *= 1e-3;
            } else if found.at_upper && hi < 1e6 {
                hi *= 8.0;
            } else {
                break;
            }
            found = scan_golden(|b| self.bracket(x, b), lo, hi, 40, true, xtol);
        }
        (found.fx, found.x)
    }

    fn outcome(&self, free: &[f64]) -> EmpiricalDistribution {
        let mut v = Vec::with_capacity(free.len() + 1);
        v.push(0.0);
        v.extend_from_slice(free);
        EmpiricalDistribution::new(v, self.probs.to_vec()).expect("probabilities validated")
    }
}

/// Points of a product grid with `m` values per axis around `center`.
fn product_grid(center: &[f64], step: f64, m: usize) -> Vec<Vec<f64>> {
    let half = (m as f64 - 1.0) / 2.0;
    let mut out = vec![Vec::new()];
    for &c in center {
        out = out
            .into_iter()
            .flat_map(|p: Vec<f64>| {
                (0..m).map(move |k| {
                    let mut q = p.clone();
                    q.push(c + (k as f64 - half) * step);
                    q
                })
            })
            .collect();
    }
    out
}

fn validate(spec: &DivergenceSpec, weights: &[f64], probs: &[f64]) -> Result<()> {
    if spec.is_extended() {
        return Err(QuadError::InvalidSpec(format!("{spec} is extended; recovery needs a divergence function")));
    }
    if weights.len() != probs.len() || weights.is_empty() {
        return Err(QuadError::InvalidInput("weights and probabilities must have equal nonzero length".into()));
    }
    if weights.len() > MAX_RECOVERY_ATOMS {
        return Err(QuadError::AtomLimit { n: weights.len(), max: MAX_RECOVERY_ATOMS });
    }
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(QuadError::InvalidInput("weights must be finite and nonnegative".into()));
    }
    if probs.iter().any(|p| !(p.is_finite() && *p > 0.0)) || (probs.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(QuadError::InvalidInput("probabilities must be positive and sum to one".into()));
    }
    let mean: f64 = weights.iter().zip(probs).map(|(w, p)| w * p).sum();
    if (mean - 1.0).abs() > 1e-9 {
        return Err(QuadError::InvalidInput(format!("weights must have mean one, got {mean}")));
    }
    Ok(())
}

/// Grid supremum for one route.
pub fn recover_divergence(
    spec: &DivergenceSpec,
    weights: &[f64],
    probs: &[f64],
    route: RecoveryRoute,
) -> Result<Recovery> {
    validate(spec, weights, probs)?;
    let n = weights.len();
    if n == 1 {
        return Ok(Recovery { route, value: 0.0, maximizer: vec![0.0], beta: 0.0, grid_exhausted: false });
    }
    let problem = Problem { spec, route, weights, probs };
    let dims = n - 1;
    let scale = weights.iter().fold(1.0f64, |m, w| m.max(*w));
    let range = 20.0 * scale;
    let per_axis = match dims {
        1 => 161,
        2 => 33,
        _ => 13,
    };
    let mut step = 2.0 * range / (per_axis as f64 - 1.0);
    // The bracket is concave in X for each radius, so its infimum is too; a coarse
    // inner search suffices to place the refinement window.
    let evaluate = |free: &[f64], coarse: bool| problem.inner(&problem.outcome(free), coarse);
    let mut best = (f64::NEG_INFINITY, vec![0.0; dims], 0.0);
    for p in product_grid(&vec![0.0; dims], step, per_axis) {
        let (v, b) = evaluate(&p, true);
        if v > best.0 {
            best = (v, p, b);
        }
    }
    let grid_exhausted = best.1.iter().any(|c| c.abs() >= range - 1e-9 * range);
    best = (f64::NEG_INFINITY, best.1, best.2);
    for _ in 0..4 {
        step /= 4.0;
        for p in product_grid(&best.1.clone(), step, 9) {
            let (v, b) = evaluate(&p, false);
            if v > best.0 {
                best = (v, p, b);
            }
        }
    }
    let mut maximizer = vec![0.0];
    maximizer.extend(best.1);
    Ok(Recovery { route, value: best.0, maximizer, beta: best.2, grid_exhausted })
}

/// All four routes.
pub fn recover_all(spec: &DivergenceSpec, weights: &[f64], probs: &[f64]) -> Result<Vec<Recovery>> {
    RecoveryRoute::ALL.iter().map(|&r| recover_divergence(spec, weights, probs, r)).collect()
}

/// Ground truth `E[φ(Q)]`.
pub fn direct_divergence(spec: &DivergenceSpec, weights: &[f64], probs: &[f64]) -> f64 {
    divergence_value(spec, weights, probs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_shape() {
        let g = product_grid(&[0.0, 1.0], 0.5, 3);
        assert_eq!(g.len(), 9);
        assert_eq!(g[0], vec![-0.5, 0.5]);
        assert_eq!(g[8], vec![0.5, 1.5]);
    }

    #[test]
    fn rejects_extended_and_large() {
        let p = [0.5, 0.5];
        assert!(recover_divergence(&DivergenceSpec::pearson_chi2_extended(), &[1.0, 1.0], &p, RecoveryRoute::Risk).is_err());
        let w = [1.0; 5];
        let p5 = [0.2; 5];
        assert!(matches!(
            recover_divergence(&DivergenceSpec::kl(), &w, &p5, RecoveryRoute::Risk),
            Err(QuadError::AtomLimit { .. })
        ));
    }
}
