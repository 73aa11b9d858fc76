//! Portfolio selection, margin classification and linear regression over any
//! catalog quadrangle.
//!
//! Each problem reduces to a convex function of a few decision variables
//! through a scalar loss variable. Risk and error values come from the closed
//! forms; subgradients are assembled from identifiers of the loss variable,
//! `∂_θ R(X_θ) ∋ E[Q*·∂_θ X_θ]`, and handed to [`minimize_convex`].

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::closed_form::{closed_form, closed_form_risk};
use crate::divergence::DivergenceSpec;
use crate::dual::{error_identifier_from_primal, identifier_at_location};
use crate::empirical::EmpiricalDistribution;
use crate::error::{QuadError, Result};
use crate::optimize::{minimize_convex, Cut, MinimizeOptions, Minimum};

/// Loss scenarios of several assets; the portfolio loss is `Σ_j w_j L_j`.
#[derive(Debug, Clone)]
pub struct PortfolioProblem {
    /// Rows are scenarios, columns assets.
    pub losses: Vec<Vec<f64>>,
    pub probs: Option<Vec<f64>>,
    pub spec: DivergenceSpec,
    pub beta: f64,
    /// Restrict to nonnegative weights; off by default.
    pub long_only: bool,
}

/// Labelled points; the loss is the negative margin `−y(wᵀx − b)`.
#[derive(Debug, Clone)]
pub struct ClassificationProblem {
    pub features: Vec<Vec<f64>>,
    /// Entries are `−1` or `+1`.
    pub labels: Vec<f64>,
    pub probs: Option<Vec<f64>>,
    pub spec: DivergenceSpec,
    pub beta: f64,
    /// Coefficient on `‖w‖²`.
    pub reg_weight: f64,
}

/// Linear regression with intercept; the loss is the residual `y − coefᵀx − intercept`.
#[derive(Debug, Clone)]
pub struct RegressionProblem {
    pub regressors: Vec<Vec<f64>>,
    pub response: Vec<f64>,
    pub probs: Option<Vec<f64>>,
    pub spec: DivergenceSpec,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub iterations: usize,
    pub final_step: f64,
    pub converged: bool,
}

impl From<&Minimum> for Diagnostics {
    fn from(m: &Minimum) -> Self {
        Diagnostics { iterations: m.iterations, final_step: m.final_step, converged: m.converged }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionReport {
    pub problem: String,
    pub spec: String,
    pub beta: f64,
    /// Portfolio weights, classifier normal or regression coefficients.
    pub decision: Vec<f64>,
    /// Classifier offset or regression intercept.
    pub offset: Option<f64>,
    pub objective: f64,
    /// Scalar loss variable at the solution, one entry per sample.
    pub loss: Vec<f64>,
    pub probs: Vec<f64>,
    /// Risk of the loss variable, attained as `E[loss · identifier]`.
    pub loss_risk: f64,
    /// Risk identifier of the loss variable.
    pub identifier: Vec<f64>,
    pub diagnostics: Diagnostics,
}

impl SolutionReport {
    pub fn loss_distribution(&self) -> Result<EmpiricalDistribution> {
        EmpiricalDistribution::new(self.loss.clone(), self.probs.clone())
    }
}

/// Both routes of a regression: joint error minimization over coefficients and
/// intercept, and deviation minimization followed by the statistic of the residual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionReport {
    pub joint: SolutionReport,
    pub two_stage: SolutionReport,
    /// Statistic interval of the two-stage residual; its midpoint is the two-stage intercept.
    pub intercept_interval: (f64, f64),
}

fn sample_probs(n: usize, probs: &Option<Vec<f64>>) -> Result<Vec<f64>> {
    match probs {
        Some(p) if p.len() != n => Err(QuadError::InvalidInput(format!("{} probabilities for {n} samples", p.len()))),
        Some(p) => Ok(p.clone()),
        None => Ok(vec![1.0 / n as f64; n]),
    }
}

fn check_rows(rows: &[Vec<f64>], what: &str) -> Result<usize> {
    let width = rows.first().map_or(0, Vec::len);
    if width == 0 || rows.iter().any(|r| r.len() != width) {
        return Err(QuadError::InvalidInput(format!("{what} must be a nonempty rectangular table")));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(QuadError::InvalidInput(format!("{what} contains non-finite entries")));
    }
    Ok(width)
}

/// Risk of the loss variable and its identifier.
pub fn risk_with_identifier(spec: &DivergenceSpec, beta: f64, x: &EmpiricalDistribution) -> Result<(f64, Vec<f64>)> {
    let (risk, s, t) = closed_form_risk(spec, beta, x)?;
    let id = identifier_at_location(spec, beta, x, s, t)?;
    Ok((risk, id.weights))
}

/// Error of the loss variable and the weights `Q* − 1` of its subgradient.
fn error_with_weights(spec: &DivergenceSpec, beta: f64, x: &EmpiricalDistribution) -> Result<(f64, Vec<f64>)> {
    let q = closed_form(spec, beta, x)?;
    let id = error_identifier_from_primal(spec, beta, x, q.regret_t)?;
    Ok((q.error, id.weights.iter().map(|w| w - 1.0).collect()))
}

/// `E[w·row]` for per-sample weights.
fn weighted_rows(rows: &[Vec<f64>], probs: &[f64], w: &[f64], scale: impl Fn(usize) -> f64) -> Vec<f64> {
    let mut out = vec![0.0; rows[0].len()];
    for (i, row) in rows.iter().enumerate() {
        let c = probs[i] * w[i] * scale(i);
        for (o, v) in out.iter_mut().zip(row) {
            *o += c * v;
        }
    }
    out
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Orthonormal basis of `{v : Σ v = 0}`, as columns.
fn zero_sum_basis(m: usize) -> Vec<Vec<f64>> {
    (1..m)
        .map(|k| {
            let norm = ((k * (k + 1)) as f64).sqrt();
            (0..m)
                .map(|j| match j.cmp(&k) {
                    std::cmp::Ordering::Less => 1.0 / norm,
                    std::cmp::Ordering::Equal => -(k as f64) / norm,
                    std::cmp::Ordering::Greater => 0.0,
                })
                .collect()
        })
        .collect()
}

pub fn solve_portfolio(problem: &PortfolioProblem) -> Result<SolutionReport> {
    let m = check_rows(&problem.losses, "loss matrix")?;
    let n = problem.losses.len();
    if m < 2 || n < 2 {
        return Err(QuadError::InvalidInput("portfolio needs at least two assets and two scenarios".into()));
    }
    let probs = sample_probs(n, &problem.probs)?;
    let (spec, beta) = (&problem.spec, problem.beta);
    let basis = zero_sum_basis(m);
    let weights_of = |u: &[f64]| -> Vec<f64> {
        let mut w = vec![1.0 / m as f64; m];
        for (b, &uk) in basis.iter().zip(u) {
            for (wj, bj) in w.iter_mut().zip(b) {
                *wj += uk * bj;
            }
        }
        w
    };
    let loss_of = |w: &[f64]| -> Result<EmpiricalDistribution> {
        EmpiricalDistribution::new(problem.losses.iter().map(|row| dot(row, w)).collect(), probs.clone())
    };
    let oracle = |u: &[f64]| -> Result<Cut> {
        let w = weights_of(u);
        if problem.long_only {
            if let Some(j) = (0..m).find(|&j| w[j] < 0.0) {
                return Ok(Cut::Infeasible { subgradient: basis.iter().map(|b| -b[j]).collect() });
            }
        }
        let x = loss_of(&w)?;
        let (risk, q) = risk_with_identifier(spec, beta, &x)?;
        let gw = weighted_rows(&problem.losses, &probs, &q, |_| 1.0);
        Ok(Cut::Objective { value: risk, subgradient: basis.iter().map(|b| dot(b, &gw)).collect() })
    };
    let best = minimize_convex(oracle, &vec![0.0; m - 1], 1.0, MinimizeOptions::default())?;
    let w = weights_of(&best.x);
    let x = loss_of(&w)?;
    let (objective, identifier) = risk_with_identifier(spec, beta, &x)?;
    Ok(SolutionReport {
        problem: "portfolio".into(),
        spec: spec.name(),
        beta,
        decision: w,
        offset: None,
        objective,
        loss: x.values().to_vec(),
        probs,
        loss_risk: objective,
        identifier,
        diagnostics: Diagnostics::from(&best),
    })
}

/// Objective of the classification problem at `(w, b)`, with the loss variable.
pub fn classification_objective(problem: &ClassificationProblem, w: &[f64], b: f64) -> Result<(f64, EmpiricalDistribution)> {
    let probs = sample_probs(problem.labels.len(), &problem.probs)?;
    let x = margin_loss(problem, w, b, probs)?;
    let (risk, _, _) = closed_form_risk(&problem.spec, problem.beta, &x)?;
    Ok((risk + problem.reg_weight * dot(w, w), x))
}

fn margin_loss(problem: &ClassificationProblem, w: &[f64], b: f64, probs: Vec<f64>) -> Result<EmpiricalDistribution> {
    let loss = problem.features.iter().zip(&problem.labels).map(|(f, y)| -y * (dot(w, f) - b)).collect();
    EmpiricalDistribution::new(loss, probs)
}

pub fn solve_classification(problem: &ClassificationProblem) -> Result<SolutionReport> {
    let d = check_rows(&problem.features, "feature matrix")?;
    let n = problem.features.len();
    if problem.labels.len() != n {
        return Err(QuadError::InvalidInput(format!("{} labels for {n} samples", problem.labels.len())));
    }
    if problem.labels.iter().any(|y| *y != 1.0 && *y != -1.0) {
        return Err(QuadError::InvalidInput("labels must be -1 or +1".into()));
    }
    if !(problem.labels.contains(&1.0) && problem.labels.contains(&-1.0)) {
        return Err(QuadError::InvalidInput("both labels must be present".into()));
    }
    if !(problem.reg_weight >= 0.0 && problem.reg_weight.is_finite()) {
        return Err(QuadError::InvalidInput("reg_weight must be nonnegative".into()));
    }
    let probs = sample_probs(n, &problem.probs)?;
    let (spec, beta, gamma) = (&problem.spec, problem.beta, problem.reg_weight);
    let oracle = |theta: &[f64]| -> Result<Cut> {
        let (w, b) = theta.split_at(d);
        let x = margin_loss(problem, w, b[0], probs.clone())?;
        let (risk, q) = risk_with_identifier(spec, beta, &x)?;
        let mut g = weighted_rows(&problem.features, &probs, &q, |i| -problem.labels[i]);
        for (gj, wj) in g.iter_mut().zip(w) {
            *gj += 2.0 * gamma * wj;
        }
        g.push(dot(&probs, &q.iter().zip(&problem.labels).map(|(qi, y)| qi * y).collect::<Vec<_>>()));
        Ok(Cut::Objective { value: risk + gamma * dot(w, w), subgradient: g })
    };
    let best = minimize_convex(oracle, &vec![0.0; d + 1], 1.0, MinimizeOptions::default())?;
    let (w, b) = best.x.split_at(d);
    let (objective, x) = classification_objective(problem, w, b[0])?;
    let (loss_risk, identifier) = risk_with_identifier(spec, beta, &x)?;
    Ok(SolutionReport {
        problem: "classification".into(),
        spec: spec.name(),
        beta,
        decision: w.to_vec(),
        offset: Some(b[0]),
        objective,
        loss: x.values().to_vec(),
        probs,
        loss_risk,
        identifier,
        diagnostics: Diagnostics::from(&best),
    })
}

/// Weighted least squares with intercept from the normal equations.
pub fn least_squares(regressors: &[Vec<f64>], response: &[f64], probs: &[f64]) -> Result<(Vec<f64>, f64)> {
    let d = check_rows(regressors, "regressor matrix")?;
    let n = regressors.len();
    let design = DMatrix::from_fn(n, d + 1, |i, j| if j < d { regressors[i][j] } else { 1.0 });
    let w = DMatrix::from_diagonal(&DVector::from_column_slice(probs));
    let gram = design.transpose() * &w * &design;
    let rhs = design.transpose() * &w * DVector::from_column_slice(response);
    let chol = gram
        .cholesky()
        .ok_or_else(|| QuadError::DegenerateInput("regressors are collinear".into()))?;
    let sol = chol.solve(&rhs);
    Ok((sol.as_slice()[..d].to_vec(), sol[d]))
}

fn residuals(problem: &RegressionProblem, coef: &[f64], intercept: f64, probs: &[f64]) -> Result<EmpiricalDistribution> {
    let z = problem.regressors.iter().zip(&problem.response).map(|(x, y)| y - dot(coef, x) - intercept).collect();
    EmpiricalDistribution::new(z, probs.to_vec())
}

pub fn solve_regression(problem: &RegressionProblem) -> Result<RegressionReport> {
    let d = check_rows(&problem.regressors, "regressor matrix")?;
    let n = problem.regressors.len();
    if problem.response.len() != n {
        return Err(QuadError::InvalidInput(format!("{} responses for {n} samples", problem.response.len())));
    }
    if n <= d {
        return Err(QuadError::InvalidInput(format!("need more samples ({n}) than regressors ({d})")));
    }
    let probs = sample_probs(n, &problem.probs)?;
    let (spec, beta) = (&problem.spec, problem.beta);
    let (ols_coef, ols_intercept) = least_squares(&problem.regressors, &problem.response, &probs)?;
    let scale = 1.0 + ols_coef.iter().map(|c| c * c).sum::<f64>().sqrt() + ols_intercept.abs();
    let gradient = |weights: &[f64]| weighted_rows(&problem.regressors, &probs, weights, |_| -1.0);

    let joint_oracle = |theta: &[f64]| -> Result<Cut> {
        let z = residuals(problem, &theta[..d], theta[d], &probs)?;
        let (err, w) = error_with_weights(spec, beta, &z)?;
        let mut g = gradient(&w);
        g.push(-dot(&probs, &w));
        Ok(Cut::Objective { value: err, subgradient: g })
    };
    let mut start = ols_coef.clone();
    start.push(ols_intercept);
    let joint = minimize_convex(joint_oracle, &start, scale, MinimizeOptions::default())?;
    let (coef, intercept) = (&joint.x[..d], joint.x[d]);
    let z = residuals(problem, coef, intercept, &probs)?;
    let (loss_risk, identifier) = risk_with_identifier(spec, beta, &z)?;
    let joint_report = SolutionReport {
        problem: "regression".into(),
        spec: spec.name(),
        beta,
        decision: coef.to_vec(),
        offset: Some(intercept),
        objective: joint.value,
        loss: z.values().to_vec(),
        probs: probs.clone(),
        loss_risk,
        identifier,
        diagnostics: Diagnostics::from(&joint),
    };

    let stage_oracle = |coef: &[f64]| -> Result<Cut> {
        let z = residuals(problem, coef, 0.0, &probs)?;
        let (risk, q) = risk_with_identifier(spec, beta, &z)?;
        let w: Vec<f64> = q.iter().map(|v| v - 1.0).collect();
        Ok(Cut::Objective { value: risk - z.expectation(), subgradient: gradient(&w) })
    };
    let stage = minimize_convex(stage_oracle, &ols_coef, scale, MinimizeOptions::default())?;
    let free = residuals(problem, &stage.x, 0.0, &probs)?;
    let cf = closed_form(spec, beta, &free)?;
    let interval = cf.statistic_interval();
    let intercept = cf.statistic_mid();
    let z = residuals(problem, &stage.x, intercept, &probs)?;
    let (loss_risk, identifier) = risk_with_identifier(spec, beta, &z)?;
    let two_stage = SolutionReport {
        problem: "regression".into(),
        spec: spec.name(),
        beta,
        decision: stage.x.clone(),
        offset: Some(intercept),
        objective: stage.value,
        loss: z.values().to_vec(),
        probs,
        loss_risk,
        identifier,
        diagnostics: Diagnostics::from(&stage),
    };
    Ok(RegressionReport { joint: joint_report, two_stage, intercept_interval: interval })
}

/// One row of an identifier export.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentifierRow {
    pub atom_index: usize,
    /// Loss value, or the sample's coordinates when given.
    pub values: Vec<f64>,
    pub prob: f64,
    pub weight: f64,
}

/// Per-sample identifier weights of a report, optionally against sample coordinates.
pub fn export_identifier(report: &SolutionReport, coords: Option<&[Vec<f64>]>) -> Vec<IdentifierRow> {
    (0..report.loss.len())
        .map(|i| IdentifierRow {
            atom_index: i,
            values: coords.map_or_else(|| vec![report.loss[i]], |c| c[i].clone()),
            prob: report.probs[i],
            weight: report.identifier[i],
        })
        .collect()
}

/// `atom_index,value,prob,weight`, or `atom_index,v0,v1,...,prob,weight` for coordinates.
pub fn write_identifier_csv<W: Write>(rows: &[IdentifierRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let width = rows.first().map_or(1, |r| r.values.len());
    let mut header = vec!["atom_index".to_string()];
    if width == 1 {
        header.push("value".into());
    } else {
        header.extend((0..width).map(|k| format!("v{k}")));
    }
    header.extend(["prob".to_string(), "weight".to_string()]);
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![r.atom_index.to_string()];
        rec.extend(r.values.iter().map(|v| v.to_string()));
        rec.push(r.prob.to_string());
        rec.push(r.weight.to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
