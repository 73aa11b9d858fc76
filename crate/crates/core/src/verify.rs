//! Cross-route agreement and quadrangle axiom checks on one distribution.

use serde::Serialize;

use crate::closed_form::{closed_form, closed_form_regret, closed_form_risk};
use crate::divergence::DivergenceSpec;
use crate::dual::{dual_deviation_oracle, dual_error_oracle, dual_regret_oracle, dual_risk_oracle, MAX_ORACLE_ATOMS};
use crate::empirical::EmpiricalDistribution;
use crate::error::Result;
use crate::primal::{primal_quadrangle, primal_risk};
use crate::scalar::golden;

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    /// Largest accepted gap between routes.
    pub gap_tol: f64,
    /// Added to the primal values; a nonzero value is a negative control.
    pub inject_gap: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { gap_tol: 1e-4, inject_gap: 0.0 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GapRow {
    pub quantity: String,
    pub primal: f64,
    pub closed: f64,
    /// Absent when the atom count exceeds the oracle limit or for the statistic.
    pub dual: Option<f64>,
    pub gap: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct AxiomRow {
    pub axiom: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub spec: String,
    pub beta: f64,
    pub atoms: usize,
    pub gaps: Vec<GapRow>,
    pub axioms: Vec<AxiomRow>,
    pub notes: Vec<String>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.gaps.iter().all(|g| g.pass) && self.axioms.iter().all(|a| a.pass)
    }

    pub fn render(&self) -> String {
        let mut s = format!("{} beta={} atoms={}\n", self.spec, self.beta, self.atoms);
        s.push_str(&format!("{:<12} {:>18} {:>18} {:>18} {:>10}  ok\n", "quantity", "primal", "closed", "dual", "gap"));
        for g in &self.gaps {
            let dual = g.dual.map_or("-".to_string(), |d| format!("{d:.12}"));
            s.push_str(&format!(
                "{:<12} {:>18.12} {:>18.12} {:>18} {:>10.2e}  {}\n",
                g.quantity,
                g.primal,
                g.closed,
                dual,
                g.gap,
                if g.pass { "yes" } else { "NO" }
            ));
        }
        for a in &self.axioms {
            s.push_str(&format!(
                "{:<34} residual {:>10.2e} (tol {:.0e})  {}\n",
                a.axiom,
                a.residual,
                a.tolerance,
                if a.pass { "yes" } else { "NO" }
            ));
        }
        for n in &self.notes {
            s.push_str(&format!("note: {n}\n"));
        }
        s
    }
}

fn gap_row(quantity: &str, primal: f64, closed: f64, dual: Option<f64>, tol: f64) -> GapRow {
    let mut gap = (primal - closed).abs();
    if let Some(d) = dual {
        gap = gap.max((primal - d).abs()).max((closed - d).abs());
    }
    GapRow { quantity: quantity.into(), primal, closed, dual, gap, pass: gap <= tol }
}

fn axiom(name: &str, residual: f64, tolerance: f64) -> AxiomRow {
    AxiomRow { axiom: name.into(), residual, tolerance, pass: residual <= tolerance }
}

/// `E(X − C)` through the regret.
fn error_at(spec: &DivergenceSpec, beta: f64, x: &EmpiricalDistribution, c: f64) -> f64 {
    let z = x.shift(-c);
    closed_form_regret(spec, beta, &z).map_or(f64::INFINITY, |v| v.0 - z.expectation())
}

/// Minimum over `C` by a uniform grid on a padded outcome range, refined locally.
fn grid_min(f: impl Fn(f64) -> f64, x: &EmpiricalDistribution) -> (f64, f64) {
    let (lo, hi) = (x.ess_inf(), x.ess_sup());
    let pad = hi - lo + 1.0;
    let (a, n) = (lo - pad, 2000);
    let h = (hi - lo + 2.0 * pad) / n as f64;
    let (mut bc, mut bf) = (a, f64::INFINITY);
    for k in 0..=n {
        let c = a + k as f64 * h;
        let v = f(c);
        if v < bf {
            (bc, bf) = (c, v);
        }
    }
    let (c, v) = golden(&f, bc - h, bc + h, Some(bc), 1e-12 * (1.0 + pad));
    if v < bf {
        (c, v)
    } else {
        (bc, bf)
    }
}

pub fn verify(spec: &DivergenceSpec, beta: f64, x: &EmpiricalDistribution, opts: VerifyOptions) -> Result<VerifyReport> {
    let tol = opts.gap_tol;
    let mut p = primal_quadrangle(spec, beta, x)?;
    p.risk += opts.inject_gap;
    p.deviation += opts.inject_gap;
    p.regret += opts.inject_gap;
    p.error += opts.inject_gap;
    let c = closed_form(spec, beta, x)?;
    let small = x.len() <= MAX_ORACLE_ATOMS;
    let dual = |f: fn(&DivergenceSpec, f64, &EmpiricalDistribution) -> Result<crate::dual::DualSolution>| -> Result<Option<f64>> {
        if small {
            Ok(Some(f(spec, beta, x)?.value))
        } else {
            Ok(None)
        }
    };
    let mut gaps = vec![
        gap_row("risk", p.risk, c.risk, dual(dual_risk_oracle)?, tol),
        gap_row("deviation", p.deviation, c.deviation, dual(dual_deviation_oracle)?, tol),
        gap_row("regret", p.regret, c.regret, dual(dual_regret_oracle)?, tol),
        gap_row("error", p.error, c.error, dual(dual_error_oracle)?, tol),
        gap_row("statistic_lo", p.statistic_lo, c.statistic_lo, None, tol),
        gap_row("statistic_hi", p.statistic_hi, c.statistic_hi, None, tol),
    ];
    let mut notes = Vec::new();
    if !small {
        notes.push(format!("dual oracle skipped: {} atoms exceed {MAX_ORACLE_ATOMS}", x.len()));
    }

    let mean = x.expectation();
    let (c_err, min_err) = grid_min(|s| error_at(spec, beta, x, s), x);
    let (_, min_ce) = grid_min(|s| s + closed_form_regret(spec, beta, &x.shift(-s)).map_or(f64::INFINITY, |v| v.0), x);
    let stat_err = error_at(spec, beta, x, c.statistic_mid());
    let span = 1.0 + x.ess_sup() - x.ess_inf();
    let in_stat = c_err >= c.statistic_lo - 1e-4 * span && c_err <= c.statistic_hi + 1e-4 * span;
    let level = x.expectation().abs() + 1.0;
    let constant = EmpiricalDistribution::constant(level);
    let constancy = (closed_form_risk(spec, beta, &constant)?.0 - level)
        .abs()
        .max((primal_risk(spec, beta, &constant)?.value - level).abs());
    let axioms = if x.is_constant() {
        notes.push("constant input: aversity and projection checks skipped".into());
        vec![axiom("constancy R(c) = c", constancy, 1e-12)]
    } else {
        vec![
            axiom("error projection D = min_C E(X-C)", (min_err - c.deviation).abs(), 1e-5),
            axiom("error projection argmin in statistic", if in_stat { 0.0 } else { 1.0 }, 0.0),
            axiom("certainty equivalence R = min_C", (min_ce - c.risk).abs(), 1e-5),
            axiom("centerness R = E[X] + D", (p.risk - mean - c.deviation).abs(), tol),
            axiom("centerness V = E[X] + E", (p.regret - mean - c.error).abs(), tol),
            axiom("centerness E(X - S) = D", (stat_err - c.deviation).abs(), 1e-7),
            axiom("constancy R(c) = c", constancy, 1e-12),
            axiom("aversity R(X) > E[X]", if c.risk - mean > 1e-9 { 0.0 } else { mean + 1e-9 - c.risk }, 0.0),
        ]
    };
    if spec.is_homogeneous() {
        let other = closed_form_risk(spec, 2.0 * beta + 1.0, x)?.0;
        notes.push(format!(
            "{} does not depend on beta: risk {} at beta={} and {} at beta={}",
            spec.name(),
            c.risk,
            beta,
            other,
            2.0 * beta + 1.0
        ));
    }
    gaps.retain(|g| g.primal.is_finite() || g.closed.is_finite());
    Ok(VerifyReport { spec: spec.name(), beta, atoms: x.len(), gaps, axioms, notes })
}
