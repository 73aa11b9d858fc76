//! File formats: spec arguments, config files, problem CSVs, JSON reports and
//! plot bundles.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::applications::{
    export_identifier, write_identifier_csv, ClassificationProblem, PortfolioProblem, RegressionProblem,
    RegressionReport, SolutionReport,
};
use crate::casestudy::{CaseStudy, CaseStudyRun};
use crate::divergence::{split_spec_string, DivergenceSpec};
use crate::error::{QuadError, Result};
use crate::svg::{scatter_svg, Line, Marker, ScatterPoint};

/// Parses `name:key=value,...`; a `beta` key is split off and returned separately.
pub fn parse_spec_arg(s: &str) -> Result<(DivergenceSpec, Option<f64>)> {
    let (name, params) = split_spec_string(s)?;
    let mut beta = None;
    let mut rest = Vec::new();
    for (k, v) in params {
        if k == "beta" {
            beta = Some(v.parse::<f64>().map_err(|_| QuadError::InvalidSpec(format!("beta=`{v}` is not a number")))?);
        } else {
            rest.push(format!("{k}={v}"));
        }
    }
    let text = if rest.is_empty() { name } else { format!("{name}:{}", rest.join(",")) };
    Ok((text.parse()?, beta))
}

/// Flat `key = value` file; blank lines and `#` comments are skipped.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| QuadError::InvalidInput(format!("config line {}: expected key = value", i + 1)))?;
        out.insert(k.trim().replace('_', "-"), v.trim().to_string());
    }
    Ok(out)
}

pub fn read_config(path: &Path) -> Result<BTreeMap<String, String>> {
    parse_config(&std::fs::read_to_string(path)?)
}

/// Numeric CSV with a header row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
        let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record?;
            let row = record
                .iter()
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|_| QuadError::InvalidInput(format!("row {}: `{f}` is not a number", line + 2)))
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(QuadError::InvalidInput("no data rows".into()));
        }
        Ok(Table { headers, rows })
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_reader(std::fs::File::open(path)?)
    }

    fn column(&self, name: &str) -> Result<usize> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| QuadError::InvalidInput(format!("missing `{name}` column")))
    }

    /// Splits off the named target column; the rest are features in file order.
    fn split_target(&self, name: &str) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
        let k = self.column(name)?;
        if self.headers.len() < 2 {
            return Err(QuadError::InvalidInput("need at least one feature column".into()));
        }
        let features = self
            .rows
            .iter()
            .map(|r| r.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, v)| *v).collect())
            .collect();
        Ok((features, self.rows.iter().map(|r| r[k]).collect()))
    }
}

pub fn portfolio_problem(table: &Table, spec: DivergenceSpec, beta: f64, long_only: bool) -> PortfolioProblem {
    PortfolioProblem { losses: table.rows.clone(), probs: None, spec, beta, long_only }
}

pub fn classification_problem(table: &Table, spec: DivergenceSpec, beta: f64, reg_weight: f64) -> Result<ClassificationProblem> {
    let (features, labels) = table.split_target("label")?;
    Ok(ClassificationProblem { features, labels, probs: None, spec, beta, reg_weight })
}

pub fn regression_problem(table: &Table, spec: DivergenceSpec, beta: f64) -> Result<RegressionProblem> {
    let (regressors, response) = table.split_target("y")?;
    Ok(RegressionProblem { regressors, response, probs: None, spec, beta })
}

/// Quadrangle values; entries not requested stay `null`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Values {
    pub risk: Option<f64>,
    pub deviation: Option<f64>,
    pub regret: Option<f64>,
    pub error: Option<f64>,
    pub statistic_lo: Option<f64>,
    pub statistic_hi: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Optimizers {
    #[serde(rename = "C")]
    pub c: Option<f64>,
    pub t: Option<f64>,
}

/// Output of `compute` and `verify`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComputeDocument {
    pub command: String,
    pub spec: String,
    pub beta: f64,
    pub values: Values,
    pub optimizers: Optimizers,
    pub diagnostics: serde_json::Value,
}

/// Output of the application commands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApplicationDocument {
    pub command: String,
    pub spec: String,
    pub beta: f64,
    pub decision: Vec<f64>,
    pub offset: Option<f64>,
    pub objective: f64,
    pub diagnostics: crate::applications::Diagnostics,
    /// File name of the identifier table, when one was written.
    pub identifier_table: Option<String>,
    pub report: SolutionReport,
    /// Deviation-then-statistic route of a regression.
    pub two_stage: Option<SolutionReport>,
    pub intercept_interval: Option<(f64, f64)>,
}

impl ApplicationDocument {
    pub fn new(command: &str, report: &SolutionReport, identifier_table: Option<String>) -> Self {
        ApplicationDocument {
            command: command.into(),
            spec: report.spec.clone(),
            beta: report.beta,
            decision: report.decision.clone(),
            offset: report.offset,
            objective: report.objective,
            diagnostics: report.diagnostics.clone(),
            identifier_table,
            report: report.clone(),
            two_stage: None,
            intercept_interval: None,
        }
    }

    pub fn regression(report: &RegressionReport, identifier_table: Option<String>) -> Self {
        let mut doc = Self::new("regress", &report.joint, identifier_table);
        doc.two_stage = Some(report.two_stage.clone());
        doc.intercept_interval = Some(report.intercept_interval);
        doc
    }
}

pub fn to_json<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("documents serialize");
    s.push('\n');
    s
}

/// Scatter of a report's identifier over the plotted coordinates, with the
/// fitted line for regression and the decision boundary for classification.
pub fn identifier_svg(command: &str, report: &SolutionReport, coords: &[Vec<f64>], labels: Option<&[f64]>) -> String {
    let points: Vec<ScatterPoint> = coords
        .iter()
        .enumerate()
        .map(|(i, c)| ScatterPoint {
            x: c[0],
            y: c.get(1).copied().unwrap_or(report.loss[i]),
            weight: report.identifier[i],
            marker: match labels {
                Some(l) if l[i] > 0.0 => Marker::Diamond,
                _ => Marker::Circle,
            },
        })
        .collect();
    let line = match command {
        "regress" if report.decision.len() == 1 => {
            Some(Line { slope: report.decision[0], intercept: report.offset.unwrap_or(0.0) })
        }
        "classify" if report.decision.len() == 2 && report.decision[1] != 0.0 => {
            let (w, b) = (&report.decision, report.offset.unwrap_or(0.0));
            Some(Line { slope: -w[0] / w[1], intercept: b / w[1] })
        }
        _ => None,
    };
    let title = format!("{command}: {} beta={}", report.spec, report.beta);
    scatter_svg(&points, line, &title)
}

/// Writes `<stem>_identifier.csv` and `<stem>.svg` into `dir`; returns the paths.
pub fn write_plot(
    dir: &Path,
    stem: &str,
    command: &str,
    report: &SolutionReport,
    coords: &[Vec<f64>],
    labels: Option<&[f64]>,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let csv_path = dir.join(format!("{stem}_identifier.csv"));
    write_identifier_csv(&export_identifier(report, Some(coords)), std::fs::File::create(&csv_path)?)?;
    let svg_path = dir.join(format!("{stem}.svg"));
    std::fs::write(&svg_path, identifier_svg(command, report, coords, labels))?;
    Ok(vec![csv_path, svg_path])
}

fn data_table(run: &CaseStudyRun) -> (Vec<String>, Vec<Vec<f64>>) {
    match run.which {
        CaseStudy::Portfolio => (vec!["asset0".into(), "asset1".into()], run.points.clone()),
        CaseStudy::Regress => (vec!["x0".into(), "y".into()], run.points.clone()),
        CaseStudy::Classify => {
            let labels = run.labels.as_deref().unwrap_or(&[]);
            let rows = run.points.iter().zip(labels).map(|(p, l)| vec![p[0], p[1], *l]).collect();
            (vec!["x0".into(), "x1".into(), "label".into()], rows)
        }
    }
}

/// Data CSV, report JSON, identifier CSV and SVG of a case study.
pub fn write_case_study_bundle(run: &CaseStudyRun, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let stem = format!("{}_seed{}", run.which.name(), run.seed);
    let data_path = dir.join(format!("{stem}_data.csv"));
    let (headers, rows) = data_table(run);
    let mut w = csv::Writer::from_path(&data_path)?;
    w.write_record(&headers)?;
    for r in &rows {
        w.write_record(r.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    let command = match run.which {
        CaseStudy::Classify => "classify",
        CaseStudy::Portfolio => "portfolio",
        CaseStudy::Regress => "regress",
    };
    let mut paths = vec![data_path];
    let plot = write_plot(dir, &stem, command, &run.report, &run.points, run.labels.as_deref())?;
    let doc = ApplicationDocument::new(command, &run.report, Some(format!("{stem}_identifier.csv")));
    let json_path = dir.join(format!("{stem}_report.json"));
    std::fs::write(&json_path, to_json(&doc))?;
    paths.push(json_path);
    paths.extend(plot);
    Ok(paths)
}
