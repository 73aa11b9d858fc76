//! Subgradient selection at kinks of the conjugate.
//!
//! Atoms whose scaled outcome `z` sits at a kink of φ* have an interval of
//! admissible weights. Atoms at the same kink share one common value (averaging
//! within a level keeps `E[Q]` and can only lower `E[φ(Q)]`), so a selection is a
//! vector with one entry per kink level. The catalog has at most two kink levels.

use crate::divergence::{conj_deriv, phi, DivergenceSpec};
use crate::error::{QuadError, Result};
use crate::scalar::{bisect_boundary, golden};

#[derive(Debug, Clone)]
pub(crate) struct Level {
    pub lo: f64,
    pub hi: f64,
    pub mass: f64,
    /// `Σ pᵢ xᵢ` over member atoms.
    pub xmass: f64,
    pub members: Vec<usize>,
}

/// Per-atom weights with kink atoms left open.
#[derive(Debug, Clone)]
pub(crate) struct Split {
    spec: DivergenceSpec,
    beta: f64,
    /// Weight of each atom; NaN marks a kink member.
    fixed: Vec<f64>,
    fixed_mean: f64,
    fixed_phi: f64,
    fixed_obj: f64,
    pub levels: Vec<Level>,
}

pub(crate) enum Objective {
    /// Maximize `E[X·Q]` subject to `E[Q] = 1`, `E[φ(Q)] ≤ β`.
    Risk,
    /// Maximize `E[X·Q]` subject to `E[φ(Q)] ≤ β`; ties prefer `E[Q] = 1`.
    Regret,
}

const SNAP: f64 = 1e-7;

fn snap_width(d: &[f64]) -> f64 {
    SNAP * (1.0 + d.iter().fold(0.0f64, |m, v| m.max(v.abs())))
}

/// Where an atom's weight comes from: a shared level with its box, or the
/// conjugate's derivative at a point.
enum Slot {
    Level(usize, (f64, f64)),
    Point(f64),
}

impl Split {
    /// `d` are centered outcomes `X − s`, `t` the scale, `x` the outcomes entering the objective.
    pub fn new(spec: &DivergenceSpec, beta: f64, d: &[f64], t: f64, x: &[f64], p: &[f64]) -> Result<Split> {
        let delta = snap_width(d);
        let kinks = spec.conj_kinks();
        let slots = d
            .iter()
            .map(|&di| match kinks.iter().position(|&zk| (di - t * zk).abs() <= delta) {
                Some(k) => Slot::Level(k, conj_deriv(spec, kinks[k]).expect("kinks lie in the conjugate domain")),
                None => Slot::Point(di / t),
            })
            .collect();
        Split::assemble(spec, beta, slots, x, p)
    }

    /// Selection at a vanishing scale: atoms at the location may take any value
    /// in the domain of φ, the rest follow the conjugate far out in its argument.
    pub fn new_at_floor(spec: &DivergenceSpec, beta: f64, d: &[f64], t: f64, x: &[f64], p: &[f64]) -> Result<Split> {
        let delta = snap_width(d);
        let slots = d
            .iter()
            .map(|&di| if di.abs() <= delta { Slot::Level(0, spec.phi_domain()) } else { Slot::Point(di / t) })
            .collect();
        Split::assemble(spec, beta, slots, x, p)
    }

    fn assemble(spec: &DivergenceSpec, beta: f64, slots: Vec<Slot>, x: &[f64], p: &[f64]) -> Result<Split> {
        let mut levels: Vec<Level> = Vec::new();
        let mut keys: Vec<usize> = Vec::new();
        let mut fixed = vec![f64::NAN; slots.len()];
        let (mut fixed_mean, mut fixed_phi, mut fixed_obj) = (0.0, 0.0, 0.0);
        for (i, slot) in slots.into_iter().enumerate() {
            match slot {
                Slot::Level(key, (lo, hi)) => {
                    let li = match keys.iter().position(|&k| k == key) {
                        Some(li) => li,
                        None => {
                            keys.push(key);
                            levels.push(Level { lo, hi, mass: 0.0, xmass: 0.0, members: Vec::new() });
                            levels.len() - 1
                        }
                    };
                    let lv = &mut levels[li];
                    lv.mass += p[i];
                    lv.xmass += p[i] * x[i];
                    lv.members.push(i);
                }
                Slot::Point(z) => {
                    let q = match conj_deriv(spec, z) {
                        Some((lo, hi)) if lo == hi => lo,
                        _ => {
                            return Err(QuadError::KinkResolution {
                                residual: f64::INFINITY,
                                detail: format!("atom {i} at z = {z} is outside the smooth part of the conjugate"),
                            })
                        }
                    };
                    fixed[i] = q;
                    fixed_mean += p[i] * q;
                    fixed_phi += p[i] * phi(spec, q);
                    fixed_obj += p[i] * x[i] * q;
                }
            }
        }
        let mut split = Split { spec: *spec, beta, fixed, fixed_mean, fixed_phi, fixed_obj, levels };
        split.bound_boxes();
        Ok(split)
    }

    /// Replaces infinite box ends by values whose divergence alone exceeds `β + 1`.
    fn bound_boxes(&mut self) {
        let (spec, cap) = (self.spec, self.beta + 1.0);
        for lv in &mut self.levels {
            let mut r = 1.0;
            if lv.hi.is_infinite() {
                while lv.mass * phi(&spec, 1.0 + r) <= cap && r < 1e12 {
                    r *= 2.0;
                }
                lv.hi = 1.0 + r;
            }
            r = 1.0;
            if lv.lo.is_infinite() {
                while lv.mass * phi(&spec, 1.0 - r) <= cap && r < 1e12 {
                    r *= 2.0;
                }
                lv.lo = 1.0 - r;
            }
        }
    }

    fn div(&self, v: &[f64]) -> f64 {
        self.fixed_phi + self.levels.iter().zip(v).map(|(l, &vk)| l.mass * phi(&self.spec, vk)).sum::<f64>()
    }

    fn obj(&self, v: &[f64]) -> f64 {
        self.fixed_obj + self.levels.iter().zip(v).map(|(l, &vk)| l.xmass * vk).sum::<f64>()
    }

    /// Full weight vector for a selection.
    pub fn weights(&self, v: &[f64]) -> Vec<f64> {
        let mut w = self.fixed.clone();
        for (lv, &vk) in self.levels.iter().zip(v) {
            for &i in &lv.members {
                w[i] = vk;
            }
        }
        w
    }

    /// Range of the first level's value for which the second level, eliminated
    /// by `E[Q] = 1`, stays in its box.
    fn mean_segment(&self) -> Option<(f64, f64)> {
        let (a, b) = (&self.levels[0], &self.levels[1]);
        let rest = 1.0 - self.fixed_mean;
        let lo = a.lo.max((rest - b.mass * b.hi) / a.mass);
        let hi = a.hi.min((rest - b.mass * b.lo) / a.mass);
        (lo <= hi + 1e-9).then_some((lo, hi.max(lo)))
    }

    fn second_from_first(&self, v1: f64) -> f64 {
        let (a, b) = (&self.levels[0], &self.levels[1]);
        (1.0 - self.fixed_mean - a.mass * v1) / b.mass
    }

    /// Convex `g` over `[lo, hi]`: the minimizer and, moving in direction `dir`
    /// from it, the farthest point with `g ≤ β`. `None` when even the minimum exceeds `β + tol`.
    fn farthest_feasible(&self, g: impl Fn(f64) -> f64, lo: f64, hi: f64, dir: f64, tol: f64) -> Option<f64> {
        let xtol = 1e-13 * (1.0 + lo.abs().max(hi.abs()));
        let (m, gm) = if hi - lo <= xtol {
            (lo, g(lo))
        } else {
            let (m, gm) = golden(&g, lo, hi, None, xtol);
            [(lo, g(lo)), (hi, g(hi))].into_iter().fold((m, gm), |best, c| if c.1 < best.1 { c } else { best })
        };
        if gm > self.beta + tol {
            return None;
        }
        let beta = self.beta;
        Some(if dir > 0.0 {
            if g(hi) <= beta {
                hi
            } else {
                bisect_boundary(|v| g(v) <= beta, m, hi, 200)
            }
        } else if dir < 0.0 {
            if g(lo) <= beta {
                lo
            } else {
                -bisect_boundary(|v| g(-v) <= beta, -m, -lo, 200)
            }
        } else {
            m
        })
    }

    fn residual_error(&self, residual: f64, detail: &str) -> QuadError {
        QuadError::KinkResolution { residual, detail: detail.to_string() }
    }

    /// Selection honoring `E[Q] = 1` that maximizes `E[X·Q]`.
    fn solve_mean_constrained(&self, tol: f64) -> Result<Vec<f64>> {
        match self.levels.len() {
            0 => {
                let r = (self.fixed_mean - 1.0).abs();
                if r > tol {
                    return Err(self.residual_error(r, "no kink atoms and E[Q] != 1"));
                }
                Ok(vec![])
            }
            1 => {
                let lv = &self.levels[0];
                let v = (1.0 - self.fixed_mean) / lv.mass;
                let miss = (lv.lo - v).max(v - lv.hi).max(0.0);
                if miss > tol {
                    return Err(self.residual_error(miss, "kink weight outside its subgradient interval"));
                }
                let v = v.clamp(lv.lo, lv.hi);
                let excess = self.div(&[v]) - self.beta;
                if excess > tol {
                    return Err(self.residual_error(excess, "divergence budget exceeded"));
                }
                Ok(vec![v])
            }
            _ => {
                let (lo, hi) = self
                    .mean_segment()
                    .ok_or_else(|| self.residual_error(f64::INFINITY, "kink intervals cannot meet E[Q] = 1"))?;
                let g = |v1: f64| self.div(&[v1, self.second_from_first(v1)]);
                let (a, b) = (&self.levels[0], &self.levels[1]);
                let slope = a.xmass - b.xmass * a.mass / b.mass;
                let v1 = self
                    .farthest_feasible(g, lo, hi, slope, tol)
                    .ok_or_else(|| self.residual_error(g(lo).min(g(hi)) - self.beta, "divergence budget exceeded"))?;
                Ok(vec![v1, self.second_from_first(v1)])
            }
        }
    }

    /// Selection without the mean constraint that maximizes `E[X·Q]`.
    fn solve_free(&self, tol: f64) -> Result<Vec<f64>> {
        match self.levels.len() {
            0 => Ok(vec![]),
            1 => {
                let lv = &self.levels[0];
                let v = self
                    .farthest_feasible(|v| self.div(&[v]), lv.lo, lv.hi, lv.xmass, tol)
                    .ok_or_else(|| self.residual_error(f64::INFINITY, "divergence budget exceeded"))?;
                Ok(vec![v])
            }
            _ => {
                let (a, b) = (&self.levels[0], &self.levels[1]);
                let best_second = |v1: f64| {
                    self.farthest_feasible(|v2| self.div(&[v1, v2]), b.lo, b.hi, b.xmass, 0.0)
                };
                let neg_value = |v1: f64| match best_second(v1) {
                    Some(v2) => -self.obj(&[v1, v2]),
                    None => f64::INFINITY,
                };
                let xtol = 1e-12 * (1.0 + a.lo.abs().max(a.hi.abs()));
                let anchor = 1.0f64.clamp(a.lo, a.hi);
                let (v1, _) = golden(neg_value, a.lo, a.hi, Some(anchor), xtol);
                let v2 = best_second(v1)
                    .ok_or_else(|| self.residual_error(f64::INFINITY, "divergence budget exceeded"))?;
                Ok(vec![v1, v2])
            }
        }
    }

    pub fn solve(&self, objective: Objective, tol: f64) -> Result<Vec<f64>> {
        match objective {
            Objective::Risk => self.solve_mean_constrained(tol).map(|v| self.weights(&v)),
            Objective::Regret => {
                let free = self.solve_free(tol)?;
                let best = self.obj(&free);
                if let Ok(v) = self.solve_mean_constrained(tol) {
                    if self.obj(&v) >= best - 1e-9 * (1.0 + best.abs()) {
                        return Ok(self.weights(&v));
                    }
                }
                Ok(self.weights(&free))
            }
        }
    }

    /// Whether some selection has `E[Q] = 1` and `E[φ(Q)] = β` (or `≤ β` when the
    /// scale sits at its lower bound).
    pub fn admits_stationarity(&self, scale_at_floor: bool, tol: f64) -> bool {
        let ok_div = |lo: f64, hi: f64| {
            if scale_at_floor {
                lo <= self.beta + tol
            } else {
                lo <= self.beta + tol && hi >= self.beta - tol
            }
        };
        match self.levels.len() {
            0 => (self.fixed_mean - 1.0).abs() <= tol && ok_div(self.fixed_phi, self.fixed_phi),
            1 => {
                let lv = &self.levels[0];
                let v = (1.0 - self.fixed_mean) / lv.mass;
                if v < lv.lo - tol || v > lv.hi + tol {
                    return false;
                }
                let g = self.div(&[v.clamp(lv.lo, lv.hi)]);
                ok_div(g, g)
            }
            _ => {
                let Some((lo, hi)) = self.mean_segment() else { return false };
                let g = |v1: f64| self.div(&[v1, self.second_from_first(v1)]);
                let xtol = 1e-13 * (1.0 + lo.abs().max(hi.abs()));
                let gmin = if hi - lo <= xtol { g(lo) } else { golden(g, lo, hi, None, xtol).1.min(g(lo)).min(g(hi)) };
                let gmax = g(lo).max(g(hi));
                ok_div(gmin, gmax)
            }
        }
    }
}
