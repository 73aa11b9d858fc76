#![allow(dead_code)]

use phiquad::EmpiricalDistribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(v: &[f64]) -> EmpiricalDistribution {
    EmpiricalDistribution::uniform(v.to_vec()).unwrap()
}

/// Random distribution with `n` atoms in [-3, 3] and random positive probabilities.
pub fn random_dist(rng: &mut ChaCha8Rng, n: usize) -> EmpiricalDistribution {
    let values: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let s: f64 = raw.iter().sum();
    EmpiricalDistribution::new(values, raw.iter().map(|r| r / s).collect()).unwrap()
}

/// Shared pool: 2 to 6 atoms.
pub fn pool(seed: u64, count: usize) -> Vec<EmpiricalDistribution> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| {
            let n = r.random_range(2..=6);
            random_dist(&mut r, n)
        })
        .collect()
}

/// Tail average of the worst `1 − alpha` mass, splitting the boundary atom.
pub fn sorted_cvar(x: &EmpiricalDistribution, alpha: f64) -> f64 {
    let mut atoms: Vec<(f64, f64)> = x.values().iter().copied().zip(x.probs().iter().copied()).collect();
    atoms.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut left = 1.0 - alpha;
    let mut acc = 0.0;
    for (v, p) in atoms {
        let take = p.min(left);
        acc += take * v;
        left -= take;
        if left <= 0.0 {
            break;
        }
    }
    acc / (1.0 - alpha)
}

/// Interval of `C` minimizing `C + (1−α)⁻¹E[X−C]₊`: all `C` with `P(X<C) ≤ α ≤ P(X≤C)`.
pub fn var_interval(x: &EmpiricalDistribution, alpha: f64) -> (f64, f64) {
    let mut atoms: Vec<(f64, f64)> = x.values().iter().copied().zip(x.probs().iter().copied()).collect();
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut cum = 0.0;
    for (k, (v, p)) in atoms.iter().enumerate() {
        cum += p;
        if (cum - alpha).abs() <= 1e-12 {
            return (*v, atoms.get(k + 1).map_or(*v, |a| a.0));
        }
        if cum > alpha {
            return (*v, *v);
        }
    }
    let last = atoms.last().unwrap().0;
    (last, last)
}

/// Minimum of a convex `f` over a uniform grid on `[lo, hi]` with `n` cells, polished by ternary search.
pub fn grid_min(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> (f64, f64) {
    let h = (hi - lo) / n as f64;
    let (mut bx, mut bf) = (lo, f64::INFINITY);
    for k in 0..=n {
        let x = lo + k as f64 * h;
        let v = f(x);
        if v < bf {
            (bx, bf) = (x, v);
        }
    }
    let (mut a, mut b) = (bx - h, bx + h);
    for _ in 0..200 {
        let m1 = a + (b - a) / 3.0;
        let m2 = b - (b - a) / 3.0;
        if f(m1) <= f(m2) {
            b = m2;
        } else {
            a = m1;
        }
    }
    let x = 0.5 * (a + b);
    let v = f(x);
    if v < bf {
        (x, v)
    } else {
        (bx, bf)
    }
}

/// Equal-weight instances with 3 to 6 atoms, so no atom is heavy enough to saturate the smooth risks at moderate β.
pub fn spread_pool(seed: u64, count: usize) -> Vec<EmpiricalDistribution> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| {
            let n = r.random_range(3..=6);
            let values: Vec<f64> = (0..n).map(|_| r.random_range(-3.0..3.0)).collect();
            EmpiricalDistribution::uniform(values).unwrap()
        })
        .collect()
}

/// Residual of the EVaR scale equation `tβ + t ln E[e^{X/t}] − E[X e^{X/t}]/E[e^{X/t}]`, evaluated with a max shift.
pub fn evar_equation_residual(x: &EmpiricalDistribution, beta: f64, t: f64) -> f64 {
    let top = x.ess_sup();
    let w = |v: f64| ((v - top) / t).exp();
    let mass = x.expect(w);
    let tilted = x.expect(|v| v * w(v)) / mass;
    t * beta + top + t * mass.ln() - tilted
}
