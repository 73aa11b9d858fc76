//! Synthetic data for the three identifier case studies, and the runs on it.
//!
//! Portfolio and regression share 1000 draws of a zero-mean bivariate Gaussian
//! with unit variances and covariance 0.5. Classification draws 100 points per
//! class from Gaussians centred at (−0.3, 0) (label −1) and (0.3, 0) (label +1)
//! with variances 0.05 and covariance 0.02. All runs use the mean quadrangle.

use nalgebra::{Matrix2, Vector2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::applications::{
    solve_classification, solve_portfolio, solve_regression, ClassificationProblem, PortfolioProblem,
    RegressionProblem, SolutionReport,
};
use crate::divergence::DivergenceSpec;
use crate::error::Result;

pub const DEFAULT_SEED: u64 = 1;
pub const PORTFOLIO_SAMPLES: usize = 1000;
pub const CLASS_SAMPLES: usize = 100;
pub const PORTFOLIO_BETA: f64 = 100.0;
pub const REGRESSION_BETA: f64 = 100.0;
pub const CLASSIFICATION_BETA: f64 = 0.01;
pub const CLASSIFICATION_REG: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseStudy {
    Portfolio,
    Classify,
    Regress,
}

impl std::str::FromStr for CaseStudy {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "portfolio" => Ok(CaseStudy::Portfolio),
            "classify" => Ok(CaseStudy::Classify),
            "regress" => Ok(CaseStudy::Regress),
            _ => Err(format!("unknown case study {s:?}; expected portfolio, classify or regress")),
        }
    }
}

impl CaseStudy {
    pub fn name(self) -> &'static str {
        match self {
            CaseStudy::Portfolio => "portfolio",
            CaseStudy::Classify => "classify",
            CaseStudy::Regress => "regress",
        }
    }
}

/// Draws from `N(mean, cov)` through the Cholesky factor of `cov`.
pub fn gaussian_pairs(rng: &mut ChaCha8Rng, n: usize, mean: [f64; 2], cov: [[f64; 2]; 2]) -> Vec<[f64; 2]> {
    let c = Matrix2::new(cov[0][0], cov[0][1], cov[1][0], cov[1][1]);
    let l = c.cholesky().expect("case-study covariances are positive definite").l();
    (0..n)
        .map(|_| {
            let z = Vector2::new(StandardNormal.sample(rng), StandardNormal.sample(rng));
            let v = l * z;
            [mean[0] + v[0], mean[1] + v[1]]
        })
        .collect()
}

/// Shared portfolio / regression sample.
pub fn correlated_sample(seed: u64) -> Vec<[f64; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    gaussian_pairs(&mut rng, PORTFOLIO_SAMPLES, [0.0, 0.0], [[1.0, 0.5], [0.5, 1.0]])
}

/// Two-class sample: features and labels.
pub fn class_sample(seed: u64) -> (Vec<[f64; 2]>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cov = [[0.05, 0.02], [0.02, 0.05]];
    let mut x = gaussian_pairs(&mut rng, CLASS_SAMPLES, [-0.3, 0.0], cov);
    x.extend(gaussian_pairs(&mut rng, CLASS_SAMPLES, [0.3, 0.0], cov));
    let mut y = vec![-1.0; CLASS_SAMPLES];
    y.extend(vec![1.0; CLASS_SAMPLES]);
    (x, y)
}

/// Data, solution and plot coordinates of one case study.
#[derive(Debug, Clone)]
pub struct CaseStudyRun {
    pub which: CaseStudy,
    pub seed: u64,
    /// Points as plotted: asset losses, features, or (regressor, response).
    pub points: Vec<Vec<f64>>,
    /// Class labels for classification.
    pub labels: Option<Vec<f64>>,
    pub report: SolutionReport,
}

pub fn run_case_study(which: CaseStudy, seed: u64) -> Result<CaseStudyRun> {
    let spec = DivergenceSpec::pearson_chi2_extended();
    match which {
        CaseStudy::Portfolio => {
            let points: Vec<Vec<f64>> = correlated_sample(seed).iter().map(|p| p.to_vec()).collect();
            let report = solve_portfolio(&PortfolioProblem {
                losses: points.clone(),
                probs: None,
                spec,
                beta: PORTFOLIO_BETA,
                long_only: false,
            })?;
            Ok(CaseStudyRun { which, seed, points, labels: None, report })
        }
        CaseStudy::Regress => {
            let points: Vec<Vec<f64>> = correlated_sample(seed).iter().map(|p| p.to_vec()).collect();
            let report = solve_regression(&RegressionProblem {
                regressors: points.iter().map(|p| vec![p[0]]).collect(),
                response: points.iter().map(|p| p[1]).collect(),
                probs: None,
                spec,
                beta: REGRESSION_BETA,
            })?
            .joint;
            Ok(CaseStudyRun { which, seed, points, labels: None, report })
        }
        CaseStudy::Classify => {
            let (x, y) = class_sample(seed);
            let points: Vec<Vec<f64>> = x.iter().map(|p| p.to_vec()).collect();
            let report = solve_classification(&ClassificationProblem {
                features: points.clone(),
                labels: y.clone(),
                probs: None,
                spec,
                beta: CLASSIFICATION_BETA,
                reg_weight: CLASSIFICATION_REG,
            })?;
            Ok(CaseStudyRun { which, seed, points, labels: Some(y), report })
        }
    }
}
