//! Scalar search primitives: golden-section minimization that tolerates `+∞`,
//! grid-seeded minimization, and bracketing root finders.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Minimizer of a unimodal `f` on `[a, b]`.
///
/// `+∞` values are treated as "move away". When both probes are infinite the
/// bracket shrinks toward `anchor` (a point known to be finite), or toward the
/// middle when none is given.
pub fn golden<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, anchor: Option<f64>, xtol: f64) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut best = if fc <= fd { (c, fc) } else { (d, fd) };
    for _ in 0..400 {
        if (b - a).abs() <= xtol {
            break;
        }
        let go_left = if fc.is_finite() || fd.is_finite() {
            fc < fd || (fc == fd && fc.is_finite() && anchor.is_some_and(|x| x < c))
        } else {
            match anchor {
                Some(x) if x < c => true,
                Some(x) if x > d => false,
                _ => {
                    a = c;
                    b = d;
                    c = b - INV_PHI * (b - a);
                    d = a + INV_PHI * (b - a);
                    fc = f(c);
                    fd = f(d);
                    continue;
                }
            }
        };
        if go_left {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
            if fc < best.1 {
                best = (c, fc);
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
            if fd < best.1 {
                best = (d, fd);
            }
        }
    }
    best
}

/// Result of a grid-seeded minimization.
#[derive(Debug, Clone, Copy)]
pub struct ScanMin {
    pub x: f64,
    pub fx: f64,
    /// The best grid point was the first one.
    pub at_lower: bool,
    /// The best grid point was the last one.
    pub at_upper: bool,
}

/// Evaluates `f` on `n` points spanning `[lo, hi]`, then golden-refines around the best one.
/// With `log_scale` the grid and refinement run in `ln x` (requires `lo > 0`).
pub fn scan_golden<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, n: usize, log_scale: bool, xtol: f64) -> ScanMin {
    let n = n.max(3);
    let (u_lo, u_hi) = if log_scale { (lo.ln(), hi.ln()) } else { (lo, hi) };
    let to_x = |u: f64| if log_scale { u.exp() } else { u };
    let grid: Vec<f64> = (0..n).map(|i| u_lo + (u_hi - u_lo) * i as f64 / (n - 1) as f64).collect();
    let vals: Vec<f64> = grid.iter().map(|&u| f(to_x(u))).collect();
    let mut k = 0;
    for i in 1..n {
        if vals[i] < vals[k] {
            k = i;
        }
    }
    if !vals[k].is_finite() {
        return ScanMin { x: to_x(grid[k]), fx: vals[k], at_lower: false, at_upper: false };
    }
    let a = grid[k.saturating_sub(1)];
    let b = grid[(k + 1).min(n - 1)];
    let (u, fu) = golden(|u| f(to_x(u)), a, b, Some(grid[k]), xtol);
    let (x, fx) = if fu <= vals[k] { (to_x(u), fu) } else { (to_x(grid[k]), vals[k]) };
    ScanMin { x, fx, at_lower: k == 0, at_upper: k == n - 1 }
}

/// Largest `x` in `[a, b]` with `pred(x)` true, for `pred` true on a prefix of the interval.
pub fn bisect_boundary<P: FnMut(f64) -> bool>(mut pred: P, mut a: f64, mut b: f64, iters: usize) -> f64 {
    for _ in 0..iters {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if pred(m) {
            a = m;
        } else {
            b = m;
        }
    }
    a
}

/// Root of a continuous `f` bracketed by `[a, b]` (opposite signs or a zero end),
/// by the Illinois variant of regula falsi with a bisection safeguard.
pub fn illinois<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, ftol: f64, max_iter: usize) -> f64 {
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return a;
    }
    if fb == 0.0 {
        return b;
    }
    let mut side = 0i8;
    for it in 0..max_iter {
        let mut x = (a * fb - b * fa) / (fb - fa);
        if !x.is_finite() || x <= a.min(b) || x >= a.max(b) || it % 8 == 7 {
            x = 0.5 * (a + b);
        }
        let fx = f(x);
        if fx.abs() <= ftol || (b - a).abs() <= 4.0 * f64::EPSILON * (1.0 + x.abs()) {
            return x;
        }
        if (fx > 0.0) == (fb > 0.0) {
            b = x;
            fb = fx;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = x;
            fa = fx;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
    }
    if fa.abs() < fb.abs() {
        a
    } else {
        b
    }
}
