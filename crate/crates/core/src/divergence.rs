//! Catalog of divergence functions, their conjugates and conjugate subgradients.
//!
//! Every entry carries hand-derived formulas for φ, φ* and the one-sided
//! derivatives of φ*. The normalization is always the member of the class
//! `φ(x) + k(x − 1)` with `0 ∈ ∂φ(1)`, so `φ*(0) = 0` and `1 ∈ ∂φ*(0)`.
//!
//! Entries are addressed by name plus parameters, e.g.
//! `indicator_cvar:alpha=0.75` or `interval_indicator:a=0.5,b=2.0`.

use std::fmt;
use std::ops::Add;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{QuadError, Result};

/// A real number or `+∞`. Negative infinity never arises in the catalog.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedReal {
    Finite(f64),
    PosInfinity,
}

impl ExtendedReal {
    /// Maps `+∞` (and NaN, which only appears past overflow) to `PosInfinity`.
    pub fn from_f64(v: f64) -> Self {
        if v.is_finite() {
            ExtendedReal::Finite(v)
        } else if v == f64::NEG_INFINITY {
            ExtendedReal::Finite(f64::MIN)
        } else {
            ExtendedReal::PosInfinity
        }
    }

    pub fn to_f64(self) -> f64 {
        match self {
            ExtendedReal::Finite(v) => v,
            ExtendedReal::PosInfinity => f64::INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(v) => Some(v),
            ExtendedReal::PosInfinity => None,
        }
    }

    /// `t · self` for `t > 0`.
    pub fn scale(self, t: f64) -> Self {
        debug_assert!(t > 0.0);
        match self {
            ExtendedReal::Finite(v) => ExtendedReal::Finite(t * v),
            ExtendedReal::PosInfinity => ExtendedReal::PosInfinity,
        }
    }
}

impl Add for ExtendedReal {
    type Output = ExtendedReal;
    fn add(self, rhs: ExtendedReal) -> ExtendedReal {
        match (self, rhs) {
            (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => ExtendedReal::Finite(a + b),
            _ => ExtendedReal::PosInfinity,
        }
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedReal::Finite(v) => write!(f, "{v}"),
            ExtendedReal::PosInfinity => write!(f, "+inf"),
        }
    }
}

/// The closed set of catalog divergences.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DivergenceKind {
    Kl,
    Tvd,
    TvdExtended,
    PearsonChi2,
    PearsonChi2Extended,
    IndicatorCvar { alpha: f64 },
    GeneralizedChi2Expectile { q: f64 },
    IntervalIndicator { a: f64, b: f64 },
}

/// A validated catalog entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergenceSpec {
    kind: DivergenceKind,
}

/// One-sided derivatives of φ* at a point; `lower == upper` where φ* is smooth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubgradientInterval {
    pub lower: f64,
    pub upper: f64,
}

impl SubgradientInterval {
    fn point(v: f64) -> Self {
        SubgradientInterval { lower: v, upper: v }
    }

    pub fn contains(&self, v: f64, tol: f64) -> bool {
        v >= self.lower - tol && v <= self.upper + tol
    }

    pub fn is_singleton(&self) -> bool {
        self.lower == self.upper
    }
}

impl DivergenceSpec {
    pub fn new(kind: DivergenceKind) -> Result<Self> {
        match kind {
            DivergenceKind::IndicatorCvar { alpha } if !(alpha > 0.0 && alpha < 1.0) => Err(
                QuadError::InvalidSpec(format!("indicator_cvar needs alpha in (0,1), got {alpha}")),
            ),
            DivergenceKind::GeneralizedChi2Expectile { q } if !(q > 0.0 && q < 1.0) => {
                Err(QuadError::InvalidSpec(format!(
                    "generalized_chi2_expectile needs q in (0,1), got {q}"
                )))
            }
            DivergenceKind::IntervalIndicator { a, b } if !(a > 0.0 && a < 1.0 && b > 1.0) => {
                Err(QuadError::InvalidSpec(format!(
                    "interval_indicator needs 0 < a < 1 < b, got a={a}, b={b}"
                )))
            }
            _ => Ok(DivergenceSpec { kind }),
        }
    }

    pub fn kl() -> Self {
        DivergenceSpec { kind: DivergenceKind::Kl }
    }
    pub fn tvd() -> Self {
        DivergenceSpec { kind: DivergenceKind::Tvd }
    }
    pub fn tvd_extended() -> Self {
        DivergenceSpec { kind: DivergenceKind::TvdExtended }
    }
    pub fn pearson_chi2() -> Self {
        DivergenceSpec { kind: DivergenceKind::PearsonChi2 }
    }
    pub fn pearson_chi2_extended() -> Self {
        DivergenceSpec { kind: DivergenceKind::PearsonChi2Extended }
    }
    pub fn indicator_cvar(alpha: f64) -> Result<Self> {
        Self::new(DivergenceKind::IndicatorCvar { alpha })
    }
    pub fn generalized_chi2_expectile(q: f64) -> Result<Self> {
        Self::new(DivergenceKind::GeneralizedChi2Expectile { q })
    }
    pub fn interval_indicator(a: f64, b: f64) -> Result<Self> {
        Self::new(DivergenceKind::IntervalIndicator { a, b })
    }

    pub fn kind(&self) -> DivergenceKind {
        self.kind
    }

    /// Base name without parameters.
    pub fn base_name(&self) -> &'static str {
        match self.kind {
            DivergenceKind::Kl => "kl",
            DivergenceKind::Tvd => "tvd",
            DivergenceKind::TvdExtended => "tvd_extended",
            DivergenceKind::PearsonChi2 => "pearson_chi2",
            DivergenceKind::PearsonChi2Extended => "pearson_chi2_extended",
            DivergenceKind::IndicatorCvar { .. } => "indicator_cvar",
            DivergenceKind::GeneralizedChi2Expectile { .. } => "generalized_chi2_expectile",
            DivergenceKind::IntervalIndicator { .. } => "interval_indicator",
        }
    }

    /// Canonical name including parameters.
    pub fn name(&self) -> String {
        self.to_string()
    }

    /// True when φ is finite somewhere on the negative half-line.
    pub fn is_extended(&self) -> bool {
        matches!(
            self.kind,
            DivergenceKind::TvdExtended
                | DivergenceKind::PearsonChi2Extended
                | DivergenceKind::GeneralizedChi2Expectile { .. }
        )
    }

    /// φ* is positively homogeneous, so `t·φ*(z/t) = φ*(z)` and β drops out.
    pub fn is_homogeneous(&self) -> bool {
        matches!(
            self.kind,
            DivergenceKind::IndicatorCvar { .. } | DivergenceKind::IntervalIndicator { .. }
        )
    }

    /// φ* is continuously differentiable on its (full) domain.
    pub fn is_smooth(&self) -> bool {
        matches!(
            self.kind,
            DivergenceKind::Kl
                | DivergenceKind::PearsonChi2
                | DivergenceKind::PearsonChi2Extended
                | DivergenceKind::GeneralizedChi2Expectile { .. }
        )
    }

    /// Closed effective domain of φ*, as `(lo, hi)`; infinite ends allowed.
    pub fn conj_domain(&self) -> (f64, f64) {
        match self.kind {
            DivergenceKind::TvdExtended => (-1.0, 1.0),
            DivergenceKind::Tvd => (f64::NEG_INFINITY, 1.0),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// Points where ∂φ* is a nondegenerate interval (including domain ends).
    pub fn conj_kinks(&self) -> &'static [f64] {
        match self.kind {
            DivergenceKind::TvdExtended | DivergenceKind::Tvd => &[-1.0, 1.0],
            DivergenceKind::IndicatorCvar { .. } | DivergenceKind::IntervalIndicator { .. } => {
                &[0.0]
            }
            _ => &[],
        }
    }

    /// Closed effective domain of φ.
    pub fn phi_domain(&self) -> (f64, f64) {
        match self.kind {
            DivergenceKind::Kl | DivergenceKind::Tvd | DivergenceKind::PearsonChi2 => {
                (0.0, f64::INFINITY)
            }
            DivergenceKind::IndicatorCvar { alpha } => (0.0, 1.0 / (1.0 - alpha)),
            DivergenceKind::IntervalIndicator { a, b } => (a, b),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// The default entry of each catalog family.
    pub fn catalog() -> Vec<DivergenceSpec> {
        vec![
            DivergenceSpec::kl(),
            DivergenceSpec::tvd(),
            DivergenceSpec::tvd_extended(),
            DivergenceSpec::pearson_chi2(),
            DivergenceSpec::pearson_chi2_extended(),
            DivergenceSpec { kind: DivergenceKind::IndicatorCvar { alpha: 0.75 } },
            DivergenceSpec { kind: DivergenceKind::GeneralizedChi2Expectile { q: 0.75 } },
            DivergenceSpec { kind: DivergenceKind::IntervalIndicator { a: 0.5, b: 2.0 } },
        ]
    }
}

impl fmt::Display for DivergenceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            DivergenceKind::IndicatorCvar { alpha } => write!(f, "indicator_cvar:alpha={alpha}"),
            DivergenceKind::GeneralizedChi2Expectile { q } => {
                write!(f, "generalized_chi2_expectile:q={q}")
            }
            DivergenceKind::IntervalIndicator { a, b } => {
                write!(f, "interval_indicator:a={a},b={b}")
            }
            _ => f.write_str(self.base_name()),
        }
    }
}

/// Splits `name:k=v,k=v` into the name and its key/value pairs.
pub fn split_spec_string(s: &str) -> Result<(String, Vec<(String, String)>)> {
    let s = s.trim();
    let (name, rest) = match s.split_once(':') {
        Some((n, r)) => (n.trim(), r.trim()),
        None => (s, ""),
    };
    if name.is_empty() {
        return Err(QuadError::InvalidSpec("empty divergence name".into()));
    }
    let mut params = Vec::new();
    if !rest.is_empty() {
        for item in rest.split(',') {
            let (k, v) = item.split_once('=').ok_or_else(|| {
                QuadError::InvalidSpec(format!("parameter `{item}` is not key=value"))
            })?;
            params.push((k.trim().to_string(), v.trim().to_string()));
        }
    }
    Ok((name.to_string(), params))
}

impl FromStr for DivergenceSpec {
    type Err = QuadError;

    fn from_str(s: &str) -> Result<Self> {
        let (name, mut params) = split_spec_string(s)?;
        let mut get = |key: &str| -> Result<Option<f64>> {
            match params.iter().position(|(k, _)| k == key) {
                Some(i) => {
                    let (_, v) = params.remove(i);
                    v.parse::<f64>().map(Some).map_err(|_| {
                        QuadError::InvalidSpec(format!("parameter {key}=`{v}` is not a number"))
                    })
                }
                None => Ok(None),
            }
        };
        let need = |v: Option<f64>, key: &str| {
            v.ok_or_else(|| QuadError::InvalidSpec(format!("{name} requires parameter `{key}`")))
        };
        let kind = match name.as_str() {
            "kl" => DivergenceKind::Kl,
            "tvd" => DivergenceKind::Tvd,
            "tvd_extended" => DivergenceKind::TvdExtended,
            "pearson_chi2" => DivergenceKind::PearsonChi2,
            "pearson_chi2_extended" => DivergenceKind::PearsonChi2Extended,
            "indicator_cvar" => DivergenceKind::IndicatorCvar { alpha: need(get("alpha")?, "alpha")? },
            "generalized_chi2_expectile" => {
                DivergenceKind::GeneralizedChi2Expectile { q: need(get("q")?, "q")? }
            }
            "interval_indicator" => {
                let a = need(get("a")?, "a")?;
                let b = need(get("b")?, "b")?;
                DivergenceKind::IntervalIndicator { a, b }
            }
            other => return Err(QuadError::InvalidSpec(format!("unknown divergence `{other}`"))),
        };
        if let Some((k, _)) = params.first() {
            return Err(QuadError::InvalidSpec(format!("unexpected parameter `{k}` for {name}")));
        }
        DivergenceSpec::new(kind)
    }
}

// ---------------------------------------------------------------------------
// Raw f64 evaluators (`f64::INFINITY` encodes +∞). Used by the solvers.
// ---------------------------------------------------------------------------

pub(crate) fn phi(spec: &DivergenceSpec, x: f64) -> f64 {
    match spec.kind {
        DivergenceKind::Kl => {
            if x > 0.0 {
                x * x.ln() - x + 1.0
            } else if x == 0.0 {
                1.0
            } else {
                f64::INFINITY
            }
        }
        DivergenceKind::TvdExtended => (x - 1.0).abs(),
        DivergenceKind::Tvd => {
            if x >= 0.0 {
                (x - 1.0).abs()
            } else {
                f64::INFINITY
            }
        }
        DivergenceKind::PearsonChi2Extended => (x - 1.0) * (x - 1.0),
        DivergenceKind::PearsonChi2 => {
            if x >= 0.0 {
                (x - 1.0) * (x - 1.0)
            } else {
                f64::INFINITY
            }
        }
        DivergenceKind::IndicatorCvar { alpha } => {
            if (0.0..=1.0 / (1.0 - alpha)).contains(&x) {
                0.0
            } else {
                f64::INFINITY
            }
        }
        DivergenceKind::GeneralizedChi2Expectile { q } => {
            let d = x - 1.0;
            if x > 1.0 {
                d * d / q
            } else {
                d * d / (1.0 - q)
            }
        }
        DivergenceKind::IntervalIndicator { a, b } => {
            if (a..=b).contains(&x) {
                0.0
            } else {
                f64::INFINITY
            }
        }
    }
}

pub(crate) fn conj(spec: &DivergenceSpec, z: f64) -> f64 {
    match spec.kind {
        DivergenceKind::Kl => z.exp_m1(),
        DivergenceKind::TvdExtended => {
            if (-1.0..=1.0).contains(&z) {
                z
            } else {
                f64::INFINITY
            }
        }
        DivergenceKind::Tvd => {
            if z <= 1.0 {
                (z + 1.0).max(0.0) - 1.0
            } else {
                f64::INFINITY
            }
        }
        DivergenceKind::PearsonChi2Extended => z * z / 4.0 + z,
        DivergenceKind::PearsonChi2 => {
            if z >= -2.0 {
                z * z / 4.0 + z
            } else {
                -1.0
            }
        }
        DivergenceKind::IndicatorCvar { alpha } => (z / (1.0 - alpha)).max(0.0),
        DivergenceKind::GeneralizedChi2Expectile { q } => {
            if z > 0.0 {
                q * z * z / 4.0 + z
            } else {
                (1.0 - q) * z * z / 4.0 + z
            }
        }
        DivergenceKind::IntervalIndicator { a, b } => {
            if z < 0.0 {
                a * z
            } else {
                b * z
            }
        }
    }
}

/// One-sided derivatives of φ*; infinite at a finite domain end. `None` outside the domain.
pub(crate) fn conj_deriv(spec: &DivergenceSpec, z: f64) -> Option<(f64, f64)> {
    let inf = f64::INFINITY;
    let d = match spec.kind {
        DivergenceKind::Kl => {
            let e = z.exp();
            (e, e)
        }
        DivergenceKind::TvdExtended => {
            if !(-1.0..=1.0).contains(&z) {
                return None;
            } else if z == -1.0 {
                (-inf, 1.0)
            } else if z == 1.0 {
                (1.0, inf)
            } else {
                (1.0, 1.0)
            }
        }
        DivergenceKind::Tvd => {
            if z > 1.0 {
                return None;
            } else if z == 1.0 {
                (1.0, inf)
            } else if z > -1.0 {
                (1.0, 1.0)
            } else if z == -1.0 {
                (0.0, 1.0)
            } else {
                (0.0, 0.0)
            }
        }
        DivergenceKind::PearsonChi2Extended => (z / 2.0 + 1.0, z / 2.0 + 1.0),
        DivergenceKind::PearsonChi2 => {
            let v = (z / 2.0 + 1.0).max(0.0);
            (v, v)
        }
        DivergenceKind::IndicatorCvar { alpha } => {
            let top = 1.0 / (1.0 - alpha);
            if z < 0.0 {
                (0.0, 0.0)
            } else if z > 0.0 {
                (top, top)
            } else {
                (0.0, top)
            }
        }
        DivergenceKind::GeneralizedChi2Expectile { q } => {
            let v = if z > 0.0 { q * z / 2.0 + 1.0 } else { (1.0 - q) * z / 2.0 + 1.0 };
            (v, v)
        }
        DivergenceKind::IntervalIndicator { a, b } => {
            if z < 0.0 {
                (a, a)
            } else if z > 0.0 {
                (b, b)
            } else {
                (a, b)
            }
        }
    };
    Some(d)
}

/// Second derivative of φ* for the smooth entries (right-continuous at breaks).
pub(crate) fn conj_second(spec: &DivergenceSpec, z: f64) -> Option<f64> {
    match spec.kind {
        DivergenceKind::Kl => Some(z.exp()),
        DivergenceKind::PearsonChi2Extended => Some(0.5),
        DivergenceKind::PearsonChi2 => Some(if z >= -2.0 { 0.5 } else { 0.0 }),
        DivergenceKind::GeneralizedChi2Expectile { q } => {
            Some(if z > 0.0 { q / 2.0 } else { (1.0 - q) / 2.0 })
        }
        _ => None,
    }
}

/// `argmin_y (y − v)²/2 + λ·φ(y)`; at `λ = 0` the projection onto the closed domain of φ.
pub(crate) fn prox(spec: &DivergenceSpec, lambda: f64, v: f64) -> f64 {
    let soft = |u: f64| u.signum() * (u.abs() - lambda).max(0.0);
    match spec.kind {
        DivergenceKind::Kl => {
            if lambda <= 0.0 {
                v.max(0.0)
            } else {
                kl_prox(lambda, v)
            }
        }
        DivergenceKind::TvdExtended => 1.0 + soft(v - 1.0),
        DivergenceKind::Tvd => (1.0 + soft(v - 1.0)).max(0.0),
        DivergenceKind::PearsonChi2Extended => (v + 2.0 * lambda) / (1.0 + 2.0 * lambda),
        DivergenceKind::PearsonChi2 => ((v + 2.0 * lambda) / (1.0 + 2.0 * lambda)).max(0.0),
        DivergenceKind::IndicatorCvar { alpha } => v.clamp(0.0, 1.0 / (1.0 - alpha)),
        DivergenceKind::GeneralizedChi2Expectile { q } => {
            let k = if v > 1.0 { 2.0 * lambda / q } else { 2.0 * lambda / (1.0 - q) };
            (v + k) / (1.0 + k)
        }
        DivergenceKind::IntervalIndicator { a, b } => v.clamp(a, b),
    }
}

/// Root of `y + λ ln y = v` in `y > 0`, via safeguarded Newton on `u = ln y`.
fn kl_prox(lambda: f64, v: f64) -> f64 {
    let g = |u: f64| u.exp() + lambda * u - v;
    let mut hi = v / lambda;
    if v >= 1.0 {
        hi = hi.min(v.ln());
    }
    let mut lo = (v - hi.exp()) / lambda;
    if lo > hi {
        lo = hi;
    }
    if hi - lo <= 0.0 {
        return hi.exp();
    }
    let mut u = 0.5 * (lo + hi);
    for _ in 0..200 {
        let gu = g(u);
        if gu > 0.0 {
            hi = u;
        } else {
            lo = u;
        }
        let step = gu / (u.exp() + lambda);
        let mut next = u - step;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - u).abs() <= 1e-15 * (1.0 + u.abs()) || hi - lo <= 1e-15 * (1.0 + u.abs()) {
            u = next;
            break;
        }
        u = next;
    }
    u.exp()
}

// ---------------------------------------------------------------------------
// Public operations
// ---------------------------------------------------------------------------

/// φ(x), total over the reals.
pub fn phi_eval(spec: &DivergenceSpec, x: f64) -> ExtendedReal {
    ExtendedReal::from_f64(phi(spec, x))
}

/// φ*(z) from the closed-form conjugate.
pub fn phi_conj_eval(spec: &DivergenceSpec, z: f64) -> ExtendedReal {
    ExtendedReal::from_f64(conj(spec, z))
}

/// One-sided derivatives of φ* at `z`.
pub fn phi_conj_subgrad(spec: &DivergenceSpec, z: f64) -> Result<SubgradientInterval> {
    match conj_deriv(spec, z) {
        Some((lower, upper)) if lower == upper => Ok(SubgradientInterval::point(lower)),
        Some((lower, upper)) => Ok(SubgradientInterval { lower, upper }),
        None => Err(QuadError::Domain(format!("{spec}: φ*({z}) = +∞"))),
    }
}

/// Evaluation grid `lo, lo + step, …, hi`.
#[derive(Debug, Clone, Copy)]
pub struct GridRange {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl GridRange {
    pub fn new(lo: f64, hi: f64, step: f64) -> Self {
        GridRange { lo, hi, step }
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        let n = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize;
        (0..=n).map(move |i| self.lo + i as f64 * self.step)
    }
}

/// Brute-force `max_x z·x − φ(x)` over grid points; a test oracle for `phi_conj_eval`.
pub fn conjugate_oracle(spec: &DivergenceSpec, z: f64, grid: &GridRange) -> f64 {
    grid.points()
        .map(|x| z * x - phi(spec, x))
        .filter(|v| !v.is_nan())
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Outcome of one axiom check.
#[derive(Debug, Clone, Serialize)]
pub struct AxiomCheck {
    pub axiom: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Pass/fail per defining axiom on the probe grid.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub name: String,
    pub extended: bool,
    pub checks: Vec<AxiomCheck>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, axiom: &str) -> Option<&AxiomCheck> {
        self.checks.iter().find(|c| c.axiom == axiom)
    }
}

/// Checks the divergence axioms for a catalog entry.
pub fn validate_spec(spec: &DivergenceSpec) -> ValidationReport {
    validate_phi(&spec.name(), spec.is_extended(), |x| phi_eval(spec, x))
}

/// Checks the divergence axioms for an arbitrary φ.
///
/// Probe grid: step 1e-2 over `[-5, 5]` when `extended`, else `[0, 5]`,
/// plus a few negative probes for the non-extended domain check.
pub fn validate_phi<F>(name: &str, extended: bool, phi: F) -> ValidationReport
where
    F: Fn(f64) -> ExtendedReal,
{
    let lo = if extended { -5.0 } else { 0.0 };
    let n = ((5.0f64 - lo) / 1e-2).round() as usize;
    let xs: Vec<f64> = (0..=n).map(|i| lo + i as f64 * 1e-2).collect();
    let vals: Vec<f64> = xs.iter().map(|&x| phi(x).to_f64()).collect();
    let mut checks = Vec::new();

    let at_one = phi(1.0);
    checks.push(AxiomCheck {
        axiom: "phi(1) = 0",
        passed: at_one == ExtendedReal::Finite(0.0),
        detail: format!("phi(1) = {at_one}"),
    });

    let worst_near_one = xs
        .iter()
        .zip(&vals)
        .filter(|(x, _)| (**x - 1.0).abs() <= 0.5)
        .map(|(_, v)| *v)
        .fold(f64::INFINITY, f64::min);
    checks.push(AxiomCheck {
        axiom: "nonnegative near 1",
        passed: worst_near_one >= 0.0,
        detail: format!("min phi on [0.5, 1.5] = {worst_near_one}"),
    });

    let mut worst_gap = 0.0f64;
    let mut broken_at = None;
    for stride in [1usize, 2, 4, 8, 16, 64, 256] {
        for i in 0..xs.len().saturating_sub(2 * stride) {
            let (a, b) = (vals[i], vals[i + 2 * stride]);
            if !(a.is_finite() && b.is_finite()) {
                continue;
            }
            let mid = vals[i + stride];
            let gap = mid - 0.5 * (a + b);
            let tol = 1e-12 * (1.0 + a.abs().max(b.abs()));
            if !mid.is_finite() || gap > tol {
                worst_gap = worst_gap.max(if mid.is_finite() { gap } else { f64::INFINITY });
                broken_at.get_or_insert(xs[i + stride]);
            }
        }
    }
    checks.push(AxiomCheck {
        axiom: "midpoint convexity",
        passed: broken_at.is_none(),
        detail: match broken_at {
            Some(x) => format!("violated near x = {x} (excess {worst_gap:.3e})"),
            None => "holds to 1e-12 on the probe grid".into(),
        },
    });

    let (l, r) = (phi(1.0 - 1e-3), phi(1.0 + 1e-3));
    checks.push(AxiomCheck {
        axiom: "1 interior to domain",
        passed: l.is_finite() && r.is_finite(),
        detail: format!("phi(1-1e-3) = {l}, phi(1+1e-3) = {r}"),
    });

    if extended {
        let neg = phi(-1.0);
        checks.push(AxiomCheck {
            axiom: "finite for some x < 0",
            passed: neg.is_finite(),
            detail: format!("extended: true, phi(-1) = {neg}"),
        });
    } else {
        let finite_neg: Vec<f64> = (1..=500)
            .map(|i| -(i as f64) * 1e-2)
            .filter(|&x| phi(x).is_finite())
            .collect();
        checks.push(AxiomCheck {
            axiom: "infinite for x < 0",
            passed: finite_neg.is_empty(),
            detail: match finite_neg.first() {
                Some(x) => format!("phi({x}) is finite"),
                None => "extended: false, phi = +inf on probed x < 0".into(),
            },
        });
    }

    ValidationReport { name: name.to_string(), extended, checks }
}

/// `E_p[φ(Q)]` for a weight vector.
pub fn divergence_value(spec: &DivergenceSpec, weights: &[f64], probs: &[f64]) -> f64 {
    weights.iter().zip(probs).map(|(&w, &p)| p * phi(spec, w)).sum()
}
