//! Optimality conditions for the statistic.
//!
//! Smooth conjugates: the pair (location, scale) solves
//!
//! ```text
//! E[φ*'(z)] = 1,   β + E[φ*(z)] − E[z·φ*'(z)] = 0,   z = (X − s)/t,
//! ```
//!
//! the partial derivatives of the primal objective in `s` and `t`. The system
//! is solved in `(s, ln t)`. The risk-scale shift of the `X/t − c` argument is
//! reported alongside as `c = s/t`.
//!
//! Nonsmooth conjugates go through [`statistic_membership_check`], which tests
//! whether zero lies in the subdifferential of the objective at a location.

use crate::divergence::{conj, conj_deriv, conj_second, DivergenceSpec};
use crate::empirical::EmpiricalDistribution;
use crate::error::{QuadError, Result};
use crate::primal::{check_beta, primal_risk, profile_scale, T_MIN};
use crate::scalar::{illinois, scan_golden};
use crate::selection::Split;

const RESIDUAL_TOL: f64 = 1e-8;

/// Root of the smooth characterizing system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharacterizingSolution {
    /// Shift in the `X/t − c` argument.
    pub shift: f64,
    pub scale: f64,
    /// Location in outcome units, `shift · scale`.
    pub statistic: f64,
    /// `E[φ*'(z)] − 1`.
    pub residual_mean: f64,
    /// `β + E[φ*(z)] − E[z·φ*'(z)]`.
    pub residual_scale: f64,
}

struct System<'a> {
    spec: &'a DivergenceSpec,
    beta: f64,
    x: &'a EmpiricalDistribution,
}

impl System<'_> {
    fn derivative(&self, z: f64) -> f64 {
        conj_deriv(self.spec, z).map_or(f64::INFINITY, |(lo, _)| lo)
    }

    fn residuals(&self, s: f64, t: f64) -> (f64, f64) {
        let (mut r1, mut r2) = (-1.0, self.beta);
        for (&v, &p) in self.x.values().iter().zip(self.x.probs()) {
            let z = (v - s) / t;
            let g = self.derivative(z);
            r1 += p * g;
            r2 += p * (conj(self.spec, z) - z * g);
        }
        (r1, r2)
    }

    /// Jacobian of the residuals in `(s, ln t)`.
    fn jacobian(&self, s: f64, t: f64) -> [[f64; 2]; 2] {
        let (mut h0, mut h1, mut h2) = (0.0, 0.0, 0.0);
        for (&v, &p) in self.x.values().iter().zip(self.x.probs()) {
            let z = (v - s) / t;
            let h = conj_second(self.spec, z).unwrap_or(0.0);
            h0 += p * h;
            h1 += p * z * h;
            h2 += p * z * z * h;
        }
        [[-h0 / t, -h1], [h1 / t, h2]]
    }

    fn newton(&self, mut s: f64, mut u: f64, iters: usize) -> (f64, f64) {
        let norm = |r: (f64, f64)| r.0.hypot(r.1);
        let mut r = self.residuals(s, u.exp());
        for _ in 0..iters {
            if norm(r) <= 1e-14 {
                break;
            }
            let j = self.jacobian(s, u.exp());
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            if det == 0.0 || !det.is_finite() {
                break;
            }
            let ds = -(j[1][1] * r.0 - j[0][1] * r.1) / det;
            let du = -(-j[1][0] * r.0 + j[0][0] * r.1) / det;
            let mut step = 1.0;
            let mut improved = false;
            for _ in 0..60 {
                let (sn, un) = (s + step * ds, u + step * du);
                let rn = self.residuals(sn, un.exp());
                if norm(rn) < norm(r) {
                    (s, u, r) = (sn, un, rn);
                    improved = true;
                    break;
                }
                step *= 0.5;
            }
            if !improved {
                break;
            }
        }
        (s, u)
    }

    /// Root of the mean equation in `s` at a fixed scale; it is decreasing in `s`.
    fn location_at(&self, t: f64) -> f64 {
        let (lo, hi) = (self.x.ess_inf(), self.x.ess_sup());
        let pad = (hi - lo) + 1.0;
        let mut a = lo - pad;
        let mut b = hi + pad;
        let f = |s: f64| self.residuals(s, t).0;
        for _ in 0..60 {
            if f(a) > 0.0 {
                break;
            }
            a -= (b - a).max(1.0);
        }
        for _ in 0..60 {
            if f(b) < 0.0 {
                break;
            }
            b += (b - a).max(1.0);
        }
        illinois(f, a, b, 1e-15, 400)
    }

    /// Objective with the location eliminated; its derivative in `t` is the scale residual.
    fn profile_in_scale(&self, t: f64) -> f64 {
        let s = self.location_at(t);
        s + t * self.beta + self.x.expect(|v| t * conj(self.spec, (v - s) / t))
    }
}

pub fn solve_characterizing(
    spec: &DivergenceSpec,
    beta: f64,
    x: &EmpiricalDistribution,
) -> Result<CharacterizingSolution> {
    check_beta(beta)?;
    if !spec.is_smooth() {
        return Err(QuadError::NonsmoothSpec(format!(
            "{spec} has a piecewise-linear conjugate; use statistic_membership_check"
        )));
    }
    if x.is_constant() {
        return Err(QuadError::DegenerateInput("constant outcome has no characterizing scale".into()));
    }
    let sys = System { spec, beta, x };
    let start = primal_risk(spec, beta, x)?;
    let span = x.ess_sup() - x.ess_inf();
    if start.t <= 1e-7 * (1.0 + span) {
        return Err(QuadError::NonConvergence {
            iterations: 0,
            detail: format!("{spec} saturates at the essential supremum for beta = {beta}; the scale equation has no positive root"),
        });
    }
    let (mut s, mut u) = sys.newton(start.location, start.t.ln(), 100);
    let mut r = sys.residuals(s, u.exp());
    if !(r.0.abs() <= RESIDUAL_TOL && r.1.abs() <= RESIDUAL_TOL) {
        let found = scan_golden(|t| sys.profile_in_scale(t), T_MIN, 100.0 * (1.0 + span), 61, true, 1e-13);
        let t = found.x;
        (s, u) = sys.newton(sys.location_at(t), t.ln(), 100);
        r = sys.residuals(s, u.exp());
    }
    if !(r.0.abs() <= RESIDUAL_TOL && r.1.abs() <= RESIDUAL_TOL) {
        return Err(QuadError::NonConvergence {
            iterations: 200,
            detail: format!("characterizing residuals ({:.3e}, {:.3e})", r.0, r.1),
        });
    }
    let t = u.exp();
    Ok(CharacterizingSolution { shift: s / t, scale: t, statistic: s, residual_mean: r.0, residual_scale: r.1 })
}

/// Whether `location` (outcome units) belongs to the statistic.
///
/// The scale is profiled out at the location; then zero must lie in the
/// subdifferential of the objective in (location, scale). Per atom that set is
/// `{(q, −φ(q)) : q ∈ ∂φ*(z)}`, so the test is: some admissible selection has
/// `E[q] = 1` and `E[φ(q)] = β`, relaxed to `≤ β` when the scale sits at its floor
/// or the conjugate is homogeneous.
pub fn statistic_membership_check(
    spec: &DivergenceSpec,
    beta: f64,
    x: &EmpiricalDistribution,
    location: f64,
) -> bool {
    if check_beta(beta).is_err() || !location.is_finite() {
        return false;
    }
    let d: Vec<f64> = x.values().iter().map(|v| v - location).collect();
    let (g, t) = profile_scale(spec, beta, &d, x.probs());
    if !g.is_finite() {
        return false;
    }
    let delta = 1e-7 * (1.0 + d.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    let at_floor = spec.is_homogeneous() || t <= delta;
    // Golden section leaves the scale residual near √ε; the root is sharper.
    let t = if spec.is_smooth() && !at_floor { polish_scale(spec, beta, x, location, t) } else { t };
    let split = if at_floor && !spec.is_homogeneous() {
        Split::new_at_floor(spec, beta, &d, t, x.values(), x.probs())
    } else {
        Split::new(spec, beta, &d, t, x.values(), x.probs())
    };
    match split {
        Ok(split) => split.admits_stationarity(at_floor, 1e-7),
        Err(_) => false,
    }
}

/// Root of the scale equation at a fixed location, bracketed around `t`.
fn polish_scale(spec: &DivergenceSpec, beta: f64, x: &EmpiricalDistribution, location: f64, t: f64) -> f64 {
    let sys = System { spec, beta, x };
    let f = |u: f64| sys.residuals(location, u.exp()).1;
    let (a, b) = (t.ln() - 0.01, t.ln() + 0.01);
    let (fa, fb) = (f(a), f(b));
    if fa.is_finite() && fb.is_finite() && fa * fb < 0.0 {
        illinois(f, a, b, 1e-15, 200).exp()
    } else {
        t
    }
}

/// Statistic of a homogeneous conjugate: the locations where
/// `E[∂⁻φ*(X − s)] ≤ 1 ≤ E[∂⁺φ*(X − s)]`, a quantile interval.
pub fn homogeneous_statistic(spec: &DivergenceSpec, x: &EmpiricalDistribution) -> Result<(f64, f64)> {
    if !spec.is_homogeneous() {
        return Err(QuadError::Homogeneity(format!("{spec} is not positively homogeneous")));
    }
    let (lo_slope, hi_slope) = conj_deriv(spec, 0.0).expect("zero lies in the conjugate domain");
    // With s inside the support, P(X ≤ s)·lo + P(X > s)·hi crosses 1 at this level.
    let level = (hi_slope - 1.0) / (hi_slope - lo_slope);
    Ok(x.quantile_interval(level))
}
