use std::path::Path;

use phiquad::applications::{solve_classification, solve_portfolio, solve_regression, SolutionReport};
use phiquad::casestudy::{run_case_study, CaseStudy};
use phiquad::closed_form::closed_form;
use phiquad::divergence::DivergenceSpec;
use phiquad::dual::{dual_deviation_oracle, dual_error_oracle, dual_regret_oracle, dual_risk_oracle};
use phiquad::io::{
    classification_problem, parse_spec_arg, portfolio_problem, regression_problem, to_json, write_case_study_bundle,
    write_plot, ApplicationDocument, ComputeDocument, Optimizers, Table, Values,
};
use phiquad::primal::primal_quadrangle;
use phiquad::verify::{verify, VerifyOptions};
use phiquad::{EmpiricalDistribution, QuadError};
use serde_json::json;

use crate::{AppArgs, Command, ComputeArgs, Route, SpecArgs, VerifyArgs, Which};

pub const EXIT_INPUT: u8 = 2;
pub const EXIT_SOLVER: u8 = 3;
pub const EXIT_VERIFY: u8 = 4;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn input(msg: impl Into<String>) -> Self {
        Failure { code: EXIT_INPUT, message: msg.into() }
    }

    /// Tags a library error with the stage it came from.
    fn at(stage: &'static str) -> impl Fn(QuadError) -> Failure {
        move |e| Failure {
            code: if e.is_input_error() { EXIT_INPUT } else { EXIT_SOLVER },
            message: format!("{stage}: {e}"),
        }
    }
}

type Outcome = Result<(), Failure>;

pub fn run(command: Command) -> Outcome {
    match command {
        Command::Compute(a) => compute(a),
        Command::Verify(a) => verify_cmd(a),
        Command::Portfolio(a) => application("portfolio", a, 0.0),
        Command::Classify(a) => application("classify", a.app, a.reg_weight),
        Command::Regress(a) => application("regress", a, 0.0),
        Command::Casestudy(a) => {
            let which: CaseStudy = a.which.parse().map_err(Failure::input)?;
            let run = run_case_study(which, a.seed).map_err(Failure::at("solve"))?;
            let paths = write_case_study_bundle(&run, &a.out_dir).map_err(Failure::at("write"))?;
            let r = &run.report;
            println!("{} seed {}: decision {:?} offset {:?} objective {}", which.name(), a.seed, r.decision, r.offset, r.objective);
            for p in paths {
                println!("wrote {}", p.display());
            }
            Ok(())
        }
    }
}

/// Spec and radius; radius-free specs default to one.
fn resolve_spec(args: &SpecArgs) -> Result<(DivergenceSpec, f64), Failure> {
    let (spec, in_spec) = parse_spec_arg(&args.spec).map_err(Failure::at("spec"))?;
    let beta = match (args.beta, in_spec) {
        (Some(b), _) | (None, Some(b)) => b,
        (None, None) if spec.is_homogeneous() => 1.0,
        (None, None) => return Err(Failure::input(format!("{} needs --beta", spec.name()))),
    };
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Failure::input(format!("beta must be positive, got {beta}")));
    }
    Ok((spec, beta))
}

fn write_file(path: &Path, text: &str) -> Outcome {
    std::fs::write(path, text).map_err(|e| Failure::input(format!("write {}: {e}", path.display())))
}

fn compute(a: ComputeArgs) -> Outcome {
    let (spec, beta) = resolve_spec(&a.common)?;
    let x = EmpiricalDistribution::from_csv_path(&a.common.data).map_err(Failure::at("data"))?;
    let (mut values, optimizers, diagnostics) = match a.route {
        Route::Primal | Route::Closed => {
            let q = if a.route == Route::Primal {
                primal_quadrangle(&spec, beta, &x).map_err(Failure::at("primal"))?
            } else {
                closed_form(&spec, beta, &x).map_err(Failure::at("closed form"))?
            };
            let values = Values {
                risk: Some(q.risk),
                deviation: Some(q.deviation),
                regret: Some(q.regret),
                error: Some(q.error),
                statistic_lo: Some(q.statistic_lo),
                statistic_hi: Some(q.statistic_hi),
            };
            let opt = Optimizers { c: Some(q.optimal_c), t: Some(q.optimal_t) };
            (values, opt, json!({ "route": route_name(a.route), "atoms": x.len(), "regret_t": q.regret_t }))
        }
        Route::Dual => {
            let stage = Failure::at("dual oracle");
            let risk = dual_risk_oracle(&spec, beta, &x).map_err(&stage)?;
            let regret = dual_regret_oracle(&spec, beta, &x).map_err(&stage)?;
            let values = Values {
                risk: Some(risk.value),
                deviation: Some(dual_deviation_oracle(&spec, beta, &x).map_err(&stage)?.value),
                regret: Some(regret.value),
                error: Some(dual_error_oracle(&spec, beta, &x).map_err(&stage)?.value),
                statistic_lo: None,
                statistic_hi: None,
            };
            let id = &risk.identifier;
            let diag = json!({
                "route": "dual",
                "atoms": x.len(),
                "identifier": {
                    "weights": id.weights,
                    "mean_weight": id.mean_weight,
                    "divergence_value": id.divergence_value,
                },
            });
            println!(
                "identifier: weights {:?} E[Q] {:.9} E[phi(Q)] {:.9}",
                id.weights, id.mean_weight, id.divergence_value
            );
            (values, Optimizers::default(), diag)
        }
    };
    let keep = |w: Which| a.which == Which::All || a.which == w;
    if !keep(Which::Risk) {
        values.risk = None;
    }
    if !keep(Which::Deviation) {
        values.deviation = None;
    }
    if !keep(Which::Regret) {
        values.regret = None;
    }
    if !keep(Which::Error) {
        values.error = None;
    }
    if !keep(Which::Statistic) {
        values.statistic_lo = None;
        values.statistic_hi = None;
    }
    if a.which == Which::Statistic && a.route == Route::Dual {
        return Err(Failure::input("the dual route does not produce the statistic"));
    }
    let print = |name: &str, v: Option<f64>| {
        if let Some(v) = v {
            println!("{name} = {v}");
        }
    };
    print("risk", values.risk);
    print("deviation", values.deviation);
    print("regret", values.regret);
    print("error", values.error);
    if let (Some(lo), Some(hi)) = (values.statistic_lo, values.statistic_hi) {
        println!("statistic = [{lo}, {hi}]");
    }
    if let (Some(c), Some(t)) = (optimizers.c, optimizers.t) {
        println!("C* = {c}  t* = {t}");
    }
    if let Some(out) = &a.out {
        let doc = ComputeDocument {
            command: "compute".into(),
            spec: spec.name(),
            beta,
            values,
            optimizers,
            diagnostics,
        };
        write_file(out, &to_json(&doc))?;
    }
    Ok(())
}

fn route_name(r: Route) -> &'static str {
    match r {
        Route::Primal => "primal",
        Route::Closed => "closed",
        Route::Dual => "dual",
    }
}

fn verify_cmd(a: VerifyArgs) -> Outcome {
    let (spec, beta) = resolve_spec(&a.common)?;
    let x = EmpiricalDistribution::from_csv_path(&a.common.data).map_err(Failure::at("data"))?;
    let opts = VerifyOptions { inject_gap: a.inject_gap, ..Default::default() };
    let report = verify(&spec, beta, &x, opts).map_err(Failure::at("verify"))?;
    print!("{}", report.render());
    if let Some(out) = &a.out {
        let value = |q: &str| report.gaps.iter().find(|g| g.quantity == q).map(|g| g.closed);
        let doc = ComputeDocument {
            command: "verify".into(),
            spec: spec.name(),
            beta,
            values: Values {
                risk: value("risk"),
                deviation: value("deviation"),
                regret: value("regret"),
                error: value("error"),
                statistic_lo: value("statistic_lo"),
                statistic_hi: value("statistic_hi"),
            },
            optimizers: Optimizers::default(),
            diagnostics: serde_json::to_value(&report).expect("report serializes"),
        };
        write_file(out, &to_json(&doc))?;
    }
    if report.all_passed() {
        println!("all checks passed");
        Ok(())
    } else {
        Err(Failure { code: EXIT_VERIFY, message: "verification failed".into() })
    }
}

fn application(command: &str, a: AppArgs, reg_weight: f64) -> Outcome {
    let (spec, beta) = resolve_spec(&a.common)?;
    let table = Table::from_path(&a.common.data).map_err(Failure::at("data"))?;
    let stem = command;
    let table_name = a.emit_plot.then(|| format!("{stem}_identifier.csv"));
    let (doc, report, coords, labels): (ApplicationDocument, SolutionReport, Vec<Vec<f64>>, Option<Vec<f64>>) =
        match command {
            "portfolio" => {
                let p = portfolio_problem(&table, spec, beta, a.long_only);
                let r = solve_portfolio(&p).map_err(Failure::at("portfolio"))?;
                (ApplicationDocument::new(command, &r, table_name), r, p.losses, None)
            }
            "classify" => {
                let p = classification_problem(&table, spec, beta, reg_weight).map_err(Failure::at("data"))?;
                let r = solve_classification(&p).map_err(Failure::at("classify"))?;
                (ApplicationDocument::new(command, &r, table_name), r, p.features, Some(p.labels))
            }
            _ => {
                let p = regression_problem(&table, spec, beta).map_err(Failure::at("data"))?;
                let r = solve_regression(&p).map_err(Failure::at("regress"))?;
                let coords = if p.regressors[0].len() == 1 {
                    p.regressors.iter().zip(&p.response).map(|(x, y)| vec![x[0], *y]).collect()
                } else {
                    p.regressors.clone()
                };
                (ApplicationDocument::regression(&r, table_name), r.joint, coords, None)
            }
        };
    if a.emit_plot {
        let paths = write_plot(&a.out_dir, stem, command, &report, &coords, labels.as_deref())
            .map_err(Failure::at("plot"))?;
        for p in paths {
            eprintln!("wrote {}", p.display());
        }
    }
    let text = to_json(&doc);
    match &a.out {
        Some(out) => {
            write_file(out, &text)?;
            println!("decision {:?} offset {:?} objective {}", report.decision, report.offset, report.objective);
        }
        None => print!("{text}"),
    }
    Ok(())
}
