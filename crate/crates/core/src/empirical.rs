//! Finite weighted-atom distributions and the elementary statistics built on them.

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{QuadError, Result};

/// A random variable on a finite sample space: outcomes with strictly positive probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDistribution {
    values: Vec<f64>,
    probs: Vec<f64>,
}

const PROB_SUM_TOL: f64 = 1e-6;

impl EmpiricalDistribution {
    /// Validates and renormalizes so the probabilities sum to one.
    pub fn new(values: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(QuadError::InvalidInput("distribution has no atoms".into()));
        }
        if values.len() != probs.len() {
            return Err(QuadError::InvalidInput(format!(
                "{} values but {} probabilities",
                values.len(),
                probs.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(QuadError::InvalidInput(format!("non-finite outcome {v}")));
        }
        if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
            return Err(QuadError::InvalidInput(format!("probability {p} is not strictly positive")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return Err(QuadError::InvalidInput(format!("probabilities sum to {total}, not 1")));
        }
        let probs = probs.into_iter().map(|p| p / total).collect();
        Ok(EmpiricalDistribution { values, probs })
    }

    /// Equiprobable atoms.
    pub fn uniform(values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        Self::new(values, vec![1.0 / n.max(1) as f64; n])
    }

    pub fn constant(c: f64) -> Self {
        EmpiricalDistribution { values: vec![c], probs: vec![1.0] }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Same probabilities, outcomes replaced.
    pub fn with_values(&self, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), self.probs.len());
        EmpiricalDistribution { values, probs: self.probs.clone() }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        self.with_values(self.values.iter().map(|&x| f(x)).collect())
    }

    /// `X + c`.
    pub fn shift(&self, c: f64) -> Self {
        self.map(|x| x + c)
    }

    /// `E[f(X)]`.
    pub fn expect(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.values.iter().zip(&self.probs).map(|(&x, &p)| p * f(x)).sum()
    }

    pub fn expectation(&self) -> f64 {
        self.expect(|x| x)
    }

    /// Population standard deviation.
    pub fn std_dev(&self) -> f64 {
        let m = self.expectation();
        self.expect(|x| (x - m) * (x - m)).max(0.0).sqrt()
    }

    pub fn l2_norm(&self) -> f64 {
        self.expect(|x| x * x).sqrt()
    }

    pub fn ess_sup(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn ess_inf(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_constant(&self) -> bool {
        self.ess_sup() == self.ess_inf()
    }

    /// Distinct outcomes in increasing order with their merged probabilities.
    pub fn sorted_atoms(&self) -> Vec<(f64, f64)> {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by(|&a, &b| self.values[a].total_cmp(&self.values[b]));
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(idx.len());
        for i in idx {
            let (v, p) = (self.values[i], self.probs[i]);
            match out.last_mut() {
                Some(last) if last.0 == v => last.1 += p,
                _ => out.push((v, p)),
            }
        }
        out
    }

    /// Lower quantile `inf{x : P(X ≤ x) ≥ α}`; the minimum at α = 0.
    pub fn var(&self, alpha: f64) -> f64 {
        let atoms = self.sorted_atoms();
        let mut cum = 0.0;
        for &(v, p) in &atoms {
            cum += p;
            if cum >= alpha - 1e-12 {
                return v;
            }
        }
        atoms[atoms.len() - 1].0
    }

    /// Upper quantile `inf{x : P(X ≤ x) > α}`; the maximum when no atom exceeds level α.
    pub fn var_upper(&self, alpha: f64) -> f64 {
        let atoms = self.sorted_atoms();
        let mut cum = 0.0;
        for &(v, p) in &atoms {
            cum += p;
            if cum > alpha + 1e-12 {
                return v;
            }
        }
        atoms[atoms.len() - 1].0
    }

    /// The closed interval of α-quantiles.
    pub fn quantile_interval(&self, alpha: f64) -> (f64, f64) {
        (self.var(alpha), self.var_upper(alpha))
    }

    /// Average of the worst `1 − α` probability mass, splitting the boundary atom.
    pub fn cvar(&self, alpha: f64) -> f64 {
        let tail = 1.0 - alpha;
        if tail <= 0.0 {
            return self.ess_sup();
        }
        let mut remaining = tail;
        let mut acc = 0.0;
        for &(v, p) in self.sorted_atoms().iter().rev() {
            let take = p.min(remaining);
            acc += take * v;
            remaining -= take;
            if remaining <= 0.0 {
                break;
            }
        }
        // Rounding can leave a sliver of mass unassigned; it belongs to the smallest atom.
        if remaining > 0.0 {
            acc += remaining * self.ess_inf();
        }
        acc / tail
    }

    /// `E(X − q)₊ / ‖(X − q)₊‖₂`, decreasing in `q` below the maximum.
    pub fn second_order_ratio(&self, q: f64) -> f64 {
        let m1 = self.expect(|x| (x - q).max(0.0));
        let m2 = self.expect(|x| (x - q).max(0.0).powi(2));
        if m2 <= 0.0 {
            return 0.0;
        }
        m1 / m2.sqrt()
    }

    /// Root `q` of `second_order_ratio(q) = 1 − α`.
    ///
    /// The ratio tends to `√P(X = sup X)` as `q` reaches the maximum, so levels
    /// with `1 − α` at or below that limit return `ess_sup`.
    pub fn second_order_quantile(&self, alpha: f64) -> Result<f64> {
        if self.is_constant() {
            return Err(QuadError::DegenerateInput(
                "second-order quantile of a constant".into(),
            ));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(QuadError::InvalidInput(format!("alpha {alpha} outside (0,1)")));
        }
        let target = 1.0 - alpha;
        let (lo0, hi) = (self.ess_inf(), self.ess_sup());
        let top_mass: f64 = self
            .values
            .iter()
            .zip(&self.probs)
            .filter(|(v, _)| **v == hi)
            .map(|(_, p)| p)
            .sum();
        if target < top_mass.sqrt() {
            return Ok(hi);
        }
        let mut lo = lo0 - 1.0;
        let mut width = hi - lo;
        for _ in 0..200 {
            if self.second_order_ratio(lo) >= target {
                break;
            }
            width *= 2.0;
            lo = hi - width;
        }
        let (mut a, mut b) = (lo, hi);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            let r = self.second_order_ratio(mid);
            if (r - target).abs() <= 1e-13 {
                return Ok(mid);
            }
            if r > target {
                a = mid;
            } else {
                b = mid;
            }
            if b - a <= 1e-15 * (1.0 + a.abs()) {
                break;
            }
        }
        Ok(0.5 * (a + b))
    }

    /// The `q`-expectile, solved exactly on the segment between sorted atoms.
    pub fn expectile(&self, q: f64) -> f64 {
        let atoms = self.sorted_atoms();
        let total_px: f64 = atoms.iter().map(|(v, p)| v * p).sum();
        let total_p: f64 = atoms.iter().map(|(_, p)| p).sum();
        let (mut below_px, mut below_p) = (0.0, 0.0);
        for k in 0..atoms.len() {
            below_px += atoms[k].0 * atoms[k].1;
            below_p += atoms[k].1;
            let (above_px, above_p) = (total_px - below_px, total_p - below_p);
            let c = (q * above_px + (1.0 - q) * below_px) / (q * above_p + (1.0 - q) * below_p);
            let upper = atoms.get(k + 1).map_or(f64::INFINITY, |a| a.0);
            if c >= atoms[k].0 && c <= upper {
                return c.clamp(atoms[0].0, atoms[atoms.len() - 1].0);
            }
        }
        atoms[atoms.len() - 1].0
    }

    /// Reads one column of values (equiprobable) or two columns `value,prob`; header required.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
        let width = rdr.headers()?.len();
        if !(1..=2).contains(&width) {
            return Err(QuadError::InvalidInput(format!(
                "expected 1 or 2 columns (value[,prob]), found {width}"
            )));
        }
        let (mut values, mut probs) = (Vec::new(), Vec::new());
        for (line, record) in rdr.records().enumerate() {
            let record = record?;
            let parse = |i: usize| -> Result<f64> {
                let field = record.get(i).unwrap_or("");
                field.parse::<f64>().map_err(|_| {
                    QuadError::InvalidInput(format!("row {}: `{field}` is not a number", line + 2))
                })
            };
            values.push(parse(0)?);
            if width == 2 {
                probs.push(parse(1)?);
            }
        }
        if width == 1 {
            Self::uniform(values)
        } else {
            Self::new(values, probs)
        }
    }

    pub fn from_csv_path(path: &std::path::Path) -> Result<Self> {
        Self::from_csv_reader(std::fs::File::open(path)?)
    }
}
