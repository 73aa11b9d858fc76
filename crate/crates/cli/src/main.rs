//! `phiquad`: quadrangle values, verification reports, application solvers and
//! case-study bundles from the command line.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "phiquad", version, about = "phi-divergence risk quadrangles on empirical data")]
pub struct Cli {
    /// Flat `key = value` file supplying defaults for any flag; flags on the command line win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Quadrangle values of one distribution.
    Compute(ComputeArgs),
    /// Primal, dual and closed-form agreement plus axiom checks.
    Verify(VerifyArgs),
    /// Minimum-risk portfolio over the hyperplane of weights summing to one.
    Portfolio(AppArgs),
    /// Margin classifier minimizing the risk of the negative margin.
    Classify(ClassifyArgs),
    /// Linear regression by error minimization and by the two-stage route.
    Regress(AppArgs),
    /// Regenerate a case-study data set and write its full artifact bundle.
    Casestudy(CaseStudyArgs),
}

#[derive(Args, Debug, Clone)]
pub struct SpecArgs {
    /// Divergence as `name[:key=value,...]`; a `beta=` key may stand in for --beta.
    #[arg(long)]
    pub spec: String,
    /// Radius of the divergence ball.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Input CSV.
    #[arg(long)]
    pub data: PathBuf,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Which {
    Risk,
    Deviation,
    Regret,
    Error,
    Statistic,
    All,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Route {
    Primal,
    Closed,
    Dual,
}

#[derive(Args, Debug)]
pub struct ComputeArgs {
    #[command(flatten)]
    pub common: SpecArgs,
    #[arg(long, value_enum, default_value = "all")]
    pub which: Which,
    #[arg(long, value_enum, default_value = "closed")]
    pub route: Route,
    /// JSON report path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: SpecArgs,
    /// JSON report path
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Offset added to the primal values (negative control).
    #[arg(long, hide = true, default_value_t = 0.0)]
    pub inject_gap: f64,
}

#[derive(Args, Debug)]
pub struct AppArgs {
    #[command(flatten)]
    pub common: SpecArgs,
    /// JSON report path; printed to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the identifier CSV and SVG scatter into --out-dir.
    #[arg(long)]
    pub emit_plot: bool,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Nonnegative portfolio weights only.
    #[arg(long)]
    pub long_only: bool,
}

#[derive(Args, Debug)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub app: AppArgs,
    /// Coefficient on the squared norm of the classifier normal.
    #[arg(long, default_value_t = 1.0)]
    pub reg_weight: f64,
}

#[derive(Args, Debug)]
pub struct CaseStudyArgs {
    /// portfolio, classify or regress.
    pub which: String,
    #[arg(long, default_value_t = phiquad::casestudy::DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

fn main() -> ExitCode {
    let argv = match config::merged_args(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("error: config: {msg}");
            return ExitCode::from(commands::EXIT_INPUT);
        }
    };
    let cli = Cli::parse_from(argv);
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
