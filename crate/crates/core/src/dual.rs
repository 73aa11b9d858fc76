//! Dual route: direct maximization of `E[X·Q]` over the risk envelope, and
//! extraction of risk identifiers from primal optimizers.
//!
//! The envelope is `{Q : E[φ(Q)] ≤ β}`, intersected with `E[Q] = 1` for risk and
//! deviation. The oracle is deliberately brute force and independent of the
//! primal solver; it is limited to a handful of atoms.

use serde::{Deserialize, Serialize};

use crate::divergence::{conj_deriv, phi, prox, DivergenceSpec};
use crate::empirical::EmpiricalDistribution;
use crate::error::{QuadError, Result};
use crate::primal::check_beta;
use crate::scalar::{bisect_boundary, illinois};
use crate::selection::{Objective, Split};

/// Largest atom count the oracle accepts.
pub const MAX_ORACLE_ATOMS: usize = 8;

const ASCENT_STEPS: usize = 500;
const KINK_TOL: f64 = 1e-6;

/// Worst-case weights over the atoms with feasibility diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskIdentifier {
    pub weights: Vec<f64>,
    pub mean_weight: f64,
    pub divergence_value: f64,
    pub attained_objective: f64,
}

impl RiskIdentifier {
    pub fn from_weights(spec: &DivergenceSpec, x: &EmpiricalDistribution, weights: Vec<f64>) -> Self {
        let p = x.probs();
        let mean_weight = weights.iter().zip(p).map(|(w, p)| w * p).sum();
        let divergence_value = weights.iter().zip(p).map(|(&w, &p)| p * phi(spec, w)).sum();
        let attained_objective = weights.iter().zip(p).zip(x.values()).map(|((w, p), v)| w * p * v).sum();
        RiskIdentifier { weights, mean_weight, divergence_value, attained_objective }
    }

    pub fn ones(x: &EmpiricalDistribution) -> Self {
        RiskIdentifier {
            weights: vec![1.0; x.len()],
            mean_weight: 1.0,
            divergence_value: 0.0,
            attained_objective: x.expectation(),
        }
    }

    /// Envelope violations beyond `tol`; empty when feasible.
    pub fn violations(&self, spec: &DivergenceSpec, beta: f64, mean_required: bool, tol: f64) -> Vec<String> {
        let mut out = Vec::new();
        if mean_required && (self.mean_weight - 1.0).abs() > tol {
            out.push(format!("E[Q] = {} differs from 1", self.mean_weight));
        }
        if self.divergence_value > beta + tol {
            out.push(format!("E[phi(Q)] = {} exceeds beta = {beta}", self.divergence_value));
        }
        if !spec.is_extended() {
            if let Some(w) = self.weights.iter().find(|w| **w < -1e-9) {
                out.push(format!("negative weight {w} for a non-extended divergence"));
            }
        }
        out
    }
}

/// Oracle value with its maximizing weights.
#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub value: f64,
    pub identifier: RiskIdentifier,
}

struct Envelope<'a> {
    spec: &'a DivergenceSpec,
    beta: f64,
    p: &'a [f64],
    mean_constrained: bool,
}

impl Envelope<'_> {
    fn divergence(&self, q: &[f64]) -> f64 {
        q.iter().zip(self.p).map(|(&w, &p)| p * phi(self.spec, w)).sum()
    }

    fn mean(&self, q: &[f64]) -> f64 {
        q.iter().zip(self.p).map(|(w, p)| w * p).sum()
    }

    /// Feasibility repair: shift onto `E[Q] = 1`, then pull radially toward `Q = 1`.
    fn retract(&self, y: &[f64]) -> Vec<f64> {
        let mut q = y.to_vec();
        if self.mean_constrained {
            let shift = self.mean(&q) - 1.0;
            q.iter_mut().for_each(|w| *w -= shift);
        }
        if self.divergence(&q) <= self.beta {
            return q;
        }
        let ray = |s: f64| -> Vec<f64> { q.iter().map(|w| 1.0 + s * (w - 1.0)).collect() };
        let s = bisect_boundary(|s| self.divergence(&ray(s)) <= self.beta, 0.0, 1.0, 100);
        ray(s)
    }

    fn prox_all(&self, y: &[f64], lambda: f64, nu: f64) -> Vec<f64> {
        y.iter().map(|&v| prox(self.spec, lambda, v - nu)).collect()
    }

    /// Shift `ν` making the proximal point satisfy the mean constraint.
    fn mean_shift(&self, y: &[f64], lambda: f64) -> f64 {
        if !self.mean_constrained {
            return 0.0;
        }
        let lo = y.iter().copied().fold(f64::INFINITY, f64::min) - 1.0;
        let hi = y.iter().copied().fold(f64::NEG_INFINITY, f64::max) - 1.0;
        illinois(|nu| self.mean(&self.prox_all(y, lambda, nu)) - 1.0, lo, hi, 1e-15, 300)
    }

    /// Euclidean projection (in the `p`-weighted inner product) onto the envelope.
    fn project(&self, y: &[f64]) -> Vec<f64> {
        let at = |lambda: f64| {
            let nu = self.mean_shift(y, lambda);
            self.prox_all(y, lambda, nu)
        };
        let q0 = at(0.0);
        if self.divergence(&q0) <= self.beta {
            return q0;
        }
        let mut hi = 1.0;
        while self.divergence(&at(hi)) > self.beta && hi < 1e15 {
            hi *= 4.0;
        }
        let lambda = illinois(|l| self.divergence(&at(l)) - self.beta, 0.0, hi, 1e-15, 300);
        at(lambda)
    }

    fn solve(&self, x: &[f64]) -> Vec<f64> {
        let obj = |q: &[f64]| -> f64 { q.iter().zip(self.p).zip(x).map(|((w, p), v)| w * p * v).sum() };
        let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return vec![1.0; x.len()];
        }
        // Projected subgradient ascent with diminishing steps from Q = 1.
        let mut q = vec![1.0; x.len()];
        let mut best = (obj(&q), q.clone());
        let c = 1.0 / scale;
        for k in 1..=ASCENT_STEPS {
            let step = c / (k as f64).sqrt();
            let y: Vec<f64> = q.iter().zip(x).map(|(w, v)| w + step * v).collect();
            q = self.retract(&y);
            let f = obj(&q);
            if f > best.0 {
                best = (f, q.clone());
            }
        }
        // Polish: exact projections with growing steps converge to the maximizer of a
        // linear objective; the radial repair above is not a projection and stalls.
        q = best.1.clone();
        let mut eta = 0.1 / scale;
        for k in 0..24 {
            let y: Vec<f64> = q.iter().zip(x).map(|(w, v)| w + eta * v).collect();
            q = self.retract(&self.project(&y));
            let f = obj(&q);
            if f > best.0 {
                best = (f, q.clone());
            }
            if k < 18 {
                eta *= 4.0;
            }
        }
        best.1
    }
}

fn oracle(spec: &DivergenceSpec, beta: f64, x: &EmpiricalDistribution, mean_constrained: bool) -> Result<DualSolution> {
    check_beta(beta)?;
    if x.len() > MAX_ORACLE_ATOMS {
        return Err(QuadError::AtomLimit { n: x.len(), max: MAX_ORACLE_ATOMS });
    }
    let env = Envelope { spec, beta, p: x.probs(), mean_constrained };
    let q = env.solve(x.values());
    let identifier = RiskIdentifier::from_weights(spec, x, q);
    Ok(DualSolution { value: identifier.attained_objective, identifier })
}

/// `sup E[X·Q]` over `E[Q] = 1`, `E[φ(Q)] ≤ β`.
pub fn dual_risk_oracle(spec: &DivergenceSpec, beta: f64, x: &EmpiricalDistribution) -> Result<DualSolution> {
    oracle(spec, beta, x, true)
}

/// `sup E[X·Q]` over `E[φ(Q)] ≤ β`.
pub fn dual_regret_oracle(spec: &DivergenceSpec, beta: f64, x: &EmpiricalDistribution) -> Result<DualSolution> {
    oracle(spec, beta, x, false)
}

pub fn dual_deviation_oracle(spec: &DivergenceSpec, beta: f64, x: &EmpiricalDistribution) -> Result<DualSolution> {
    let s = dual_risk_oracle(spec, beta, x)?;
    Ok(DualSolution { value: s.value - x.expectation(), ..s })
}

pub fn dual_error_oracle(spec: &DivergenceSpec, beta: f64, x: &EmpiricalDistribution) -> Result<DualSolution> {
    let s = dual_regret_oracle(spec, beta, x)?;
    Ok(DualSolution { value: s.value - x.expectation(), ..s })
}

/// Re-solves `E[φ*'((X − s)/t)] = 1` for the location at fixed scale, removing the
/// optimizer's residual in the mean constraint for differentiable conjugates.
fn polish_location(spec: &DivergenceSpec, x: &EmpiricalDistribution, s: f64, t: f64) -> f64 {
    let mean_slope = |s: f64| {
        x.values()
            .iter()
            .zip(x.probs())
            .map(|(&v, &p)| p * conj_deriv(spec, (v - s) / t).map_or(f64::NAN, |d| d.0))
            .sum::<f64>()
            - 1.0
    };
    let r0 = mean_slope(s);
    if !r0.is_finite() || r0 == 0.0 {
        return s;
    }
    let dir = r0.signum();
    let mut w = 1e-9 * (1.0 + s.abs()) + 1e-9 * t;
    for _ in 0..80 {
        let other = s + dir * w;
        let r = mean_slope(other);
        if r.is_finite() && r.signum() != dir {
            return illinois(mean_slope, s, other, 1e-15, 300);
        }
        w *= 2.0;
    }
    s
}

/// Identifier from the risk optimizers: `Q* ∈ ∂φ*(X/t − c)`, with kink atoms tuned so
/// that `E[Q*] = 1` and `E[φ(Q*)] ≤ β` hold while `E[X·Q*]` is maximal.
pub fn risk_identifier_from_primal(
    spec: &DivergenceSpec,
    beta: f64,
    x: &EmpiricalDistribution,
    c: f64,
    t: f64,
) -> Result<RiskIdentifier> {
    identifier_at_location(spec, beta, x, c * t, t)
}

/// As [`risk_identifier_from_primal`] with the location `s = c·t` given directly.
pub fn identifier_at_location(
    spec: &DivergenceSpec,
    beta: f64,
    x: &EmpiricalDistribution,
    s: f64,
    t: f64,
) -> Result<RiskIdentifier> {
    check_beta(beta)?;
    if x.is_constant() {
        return Ok(RiskIdentifier::ones(x));
    }
    if !(t > 0.0 && t.is_finite() && s.is_finite()) {
        return Err(QuadError::InvalidInput(format!("optimizers must be finite with t > 0, got s={s}, t={t}")));
    }
    let span = x.ess_sup() - x.ess_inf();
    let at_floor = !spec.is_homogeneous() && t <= 1e-7 * (1.0 + span);
    let s = if spec.is_smooth() && !at_floor { polish_location(spec, x, s, t) } else { s };
    let d: Vec<f64> = x.values().iter().map(|v| v - s).collect();
    let split = if at_floor {
        Split::new_at_floor(spec, beta, &d, t, x.values(), x.probs())?
    } else {
        Split::new(spec, beta, &d, t, x.values(), x.probs())?
    };
    let w = split.solve(Objective::Risk, KINK_TOL)?;
    Ok(RiskIdentifier::from_weights(spec, x, w))
}

/// Identifier from the regret optimizer: `Q* ∈ ∂φ*(X/t)`; ties at kinks prefer `E[Q*] = 1`.
pub fn error_identifier_from_primal(
    spec: &DivergenceSpec,
    beta: f64,
    x: &EmpiricalDistribution,
    t: f64,
) -> Result<RiskIdentifier> {
    check_beta(beta)?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(QuadError::InvalidInput(format!("scale must be positive, got {t}")));
    }
    let split = Split::new(spec, beta, x.values(), t, x.values(), x.probs())?;
    let w = split.solve(Objective::Regret, KINK_TOL)?;
    Ok(RiskIdentifier::from_weights(spec, x, w))
}
