//! Small-dimensional nonsmooth convex minimization from a subgradient oracle.
//!
//! A short run of averaged subgradient steps finds a center and a scale, then
//! central-cut ellipsoid iterations shrink a region around it until the
//! first-order gap bound `√(gᵀPg)` is below tolerance. One-dimensional problems
//! use interval halving on the subgradient sign instead of the ellipsoid.

use nalgebra::{DMatrix, DVector};

use crate::error::{QuadError, Result};

/// Answer of the oracle at a query point.
#[derive(Debug, Clone)]
pub enum Cut {
    Objective { value: f64, subgradient: Vec<f64> },
    /// The point violates a constraint; the subgradient is of the violated constraint.
    Infeasible { subgradient: Vec<f64> },
}

#[derive(Debug, Clone, Copy)]
pub struct MinimizeOptions {
    pub max_iter: usize,
    pub warm_steps: usize,
    /// Relative tolerance on the gap bound.
    pub ftol: f64,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions { max_iter: 20_000, warm_steps: 300, ftol: 1e-13 }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    /// Last gap bound `√(gᵀPg)` (interval half-width in one dimension).
    pub final_step: f64,
    pub converged: bool,
}

struct Best {
    x: Vec<f64>,
    value: f64,
}

impl Best {
    fn offer(&mut self, x: &[f64], value: f64) {
        if value < self.value {
            self.value = value;
            self.x = x.to_vec();
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Minimizes a convex function given by `oracle`, starting at `x0` with a region of
/// roughly `radius` around it. The region is recentred and enlarged when the
/// minimizer lands near its boundary.
pub fn minimize_convex<F>(mut oracle: F, x0: &[f64], radius: f64, opts: MinimizeOptions) -> Result<Minimum>
where
    F: FnMut(&[f64]) -> Result<Cut>,
{
    let n = x0.len();
    if n == 0 {
        return Err(QuadError::InvalidInput("no decision variables".into()));
    }
    let radius = if radius.is_finite() && radius > 0.0 { radius } else { 1.0 };
    let mut best = Best { x: x0.to_vec(), value: f64::INFINITY };
    let mut used = 0;

    // Averaged subgradient steps.
    let mut x = x0.to_vec();
    let mut avg = x0.to_vec();
    let mut weight = 0.0;
    for k in 1..=opts.warm_steps {
        used += 1;
        let g = match oracle(&x)? {
            Cut::Objective { value, subgradient } => {
                best.offer(&x, value);
                let step = 1.0 / (k as f64).sqrt();
                weight += step;
                for (a, xi) in avg.iter_mut().zip(&x) {
                    *a += step / weight * (xi - *a);
                }
                subgradient
            }
            Cut::Infeasible { subgradient } => subgradient,
        };
        let gn = norm(&g);
        if gn == 0.0 || !gn.is_finite() {
            break;
        }
        let step = radius / (k as f64).sqrt() / gn;
        for (xi, gi) in x.iter_mut().zip(&g) {
            *xi -= step * gi;
        }
    }
    if weight > 0.0 {
        used += 1;
        if let Cut::Objective { value, .. } = oracle(&avg)? {
            best.offer(&avg, value);
        }
    }
    if !best.value.is_finite() {
        return Err(QuadError::NonConvergence {
            iterations: used,
            detail: "no feasible point with a finite objective found".into(),
        });
    }

    let travelled = norm(&best.x.iter().zip(x0).map(|(a, b)| a - b).collect::<Vec<_>>());
    let mut r = radius.max(2.0 * travelled);
    let mut last_gap = f64::INFINITY;
    let mut converged = false;
    for _ in 0..8 {
        let center = best.x.clone();
        let (gap, done, iters) = if n == 1 {
            halve_interval(&mut oracle, &mut best, center[0], r, opts.max_iter.saturating_sub(used), opts.ftol)?
        } else {
            ellipsoid(&mut oracle, &mut best, &center, r, opts.max_iter.saturating_sub(used), opts.ftol)?
        };
        used += iters;
        last_gap = gap;
        converged = done;
        let moved = norm(&best.x.iter().zip(&center).map(|(a, b)| a - b).collect::<Vec<_>>());
        if moved <= 0.5 * r || used >= opts.max_iter {
            break;
        }
        r *= 8.0;
    }
    if !converged && used >= opts.max_iter {
        return Err(QuadError::NonConvergence {
            iterations: used,
            detail: format!("gap bound {last_gap:.3e} at objective {:.12e}", best.value),
        });
    }
    Ok(Minimum { x: best.x, value: best.value, iterations: used, final_step: last_gap, converged })
}

fn halve_interval<F>(oracle: &mut F, best: &mut Best, c: f64, r: f64, budget: usize, ftol: f64) -> Result<(f64, bool, usize)>
where
    F: FnMut(&[f64]) -> Result<Cut>,
{
    let (mut lo, mut hi) = (c - r, c + r);
    let mut iters = 0;
    let mut gap = f64::INFINITY;
    while iters < budget {
        let m = 0.5 * (lo + hi);
        iters += 1;
        let g = match oracle(&[m])? {
            Cut::Objective { value, subgradient } => {
                best.offer(&[m], value);
                gap = subgradient[0].abs() * 0.5 * (hi - lo);
                if gap <= ftol * (1.0 + value.abs()) || subgradient[0] == 0.0 {
                    return Ok((gap, true, iters));
                }
                subgradient[0]
            }
            Cut::Infeasible { subgradient } => subgradient[0],
        };
        if g > 0.0 {
            hi = m;
        } else {
            lo = m;
        }
        if hi - lo <= 1e-15 * (1.0 + m.abs()) {
            return Ok((gap, true, iters));
        }
    }
    Ok((gap, false, iters))
}

fn ellipsoid<F>(oracle: &mut F, best: &mut Best, center: &[f64], r: f64, budget: usize, ftol: f64) -> Result<(f64, bool, usize)>
where
    F: FnMut(&[f64]) -> Result<Cut>,
{
    let n = center.len();
    let nf = n as f64;
    let mut x = DVector::from_column_slice(center);
    let mut p = DMatrix::<f64>::identity(n, n) * (r * r);
    let mut gap = f64::INFINITY;
    for iters in 1..=budget {
        let (g, is_objective) = match oracle(x.as_slice())? {
            Cut::Objective { value, subgradient } => {
                best.offer(x.as_slice(), value);
                (DVector::from_vec(subgradient), Some(value))
            }
            Cut::Infeasible { subgradient } => (DVector::from_vec(subgradient), None),
        };
        let pg = &p * &g;
        let gpg = g.dot(&pg);
        if !(gpg > 0.0) || !gpg.is_finite() {
            return Ok((0.0, is_objective.is_some(), iters));
        }
        let width = gpg.sqrt();
        if let Some(value) = is_objective {
            gap = width;
            if width <= ftol * (1.0 + value.abs()) {
                return Ok((gap, true, iters));
            }
        }
        let step = &pg / width;
        x -= &step / (nf + 1.0);
        p = (&p - (&step * step.transpose()) * (2.0 / (nf + 1.0))) * (nf * nf / (nf * nf - 1.0));
        p = (&p + p.transpose()) * 0.5;
        let size = p.diagonal().iter().fold(0.0f64, |m, v| m.max(*v)).sqrt();
        if size <= 1e-15 * (1.0 + x.norm()) {
            return Ok((gap, true, iters));
        }
    }
    Ok((gap, false, budget))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn piecewise_linear_and_quadratic() {
        let f = |x: &[f64]| {
            let v = (x[0] - 1.0).abs() + 2.0 * (x[1] + 0.5).abs() + (x[0] - x[1]).powi(2);
            let g0 = (x[0] - 1.0).signum() + 2.0 * (x[0] - x[1]);
            let g1 = 2.0 * (x[1] + 0.5).signum() - 2.0 * (x[0] - x[1]);
            Ok(Cut::Objective { value: v, subgradient: vec![g0, g1] })
        };
        let m = minimize_convex(f, &[0.0, 0.0], 1.0, MinimizeOptions::default()).unwrap();
        let mut grid = f64::INFINITY;
        for i in 0..=400 {
            for j in 0..=400 {
                let (a, b) = (-2.0 + i as f64 * 0.01, -2.0 + j as f64 * 0.01);
                grid = grid.min((a - 1.0).abs() + 2.0 * (b + 0.5).abs() + (a - b).powi(2));
            }
        }
        assert!(m.value <= grid + 1e-10 && m.value >= grid - 1e-3, "{m:?} {grid}");
    }

    #[test]
    fn one_dimensional_far_minimizer() {
        let f = |x: &[f64]| Ok(Cut::Objective { value: (x[0] - 300.0).powi(2), subgradient: vec![2.0 * (x[0] - 300.0)] });
        let m = minimize_convex(f, &[0.0], 1.0, MinimizeOptions::default()).unwrap();
        assert!((m.x[0] - 300.0).abs() < 1e-6, "{m:?}");
    }

    #[test]
    fn constrained_by_cut() {
        // min x + y subject to x, y ≥ 1 and x + y ≤ 10.
        let f = |x: &[f64]| {
            if x[0] < 1.0 {
                Ok(Cut::Infeasible { subgradient: vec![-1.0, 0.0] })
            } else if x[1] < 1.0 {
                Ok(Cut::Infeasible { subgradient: vec![0.0, -1.0] })
            } else {
                Ok(Cut::Objective { value: x[0] + x[1], subgradient: vec![1.0, 1.0] })
            }
        };
        let m = minimize_convex(f, &[3.0, 4.0], 5.0, MinimizeOptions::default()).unwrap();
        assert!((m.value - 2.0).abs() < 1e-8, "{m:?}");
    }
}
