//! Error type shared by every module.

use thiserror::Error;

/// Failure modes of the quadrangle computations.
#[derive(Debug, Error)]
pub enum QuadError {
    /// A conjugate subgradient was requested outside the effective domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// The minimization never produced a finite objective.
    #[error("unbounded objective: {0}")]
    Unbounded(String),

    /// The input is degenerate for the requested operation (e.g. constant X).
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// No subgradient selection satisfies the envelope constraints.
    #[error("kink resolution failed: residual {residual:.3e} ({detail})")]
    KinkResolution { residual: f64, detail: String },

    /// The operation needs a differentiable conjugate.
    #[error("divergence `{0}` has a nonsmooth conjugate")]
    NonsmoothSpec(String),

    /// The operation needs a positively homogeneous conjugate.
    #[error("divergence `{0}` is not positively homogeneous")]
    Homogeneity(String),

    /// An iterative solver hit its iteration cap.
    #[error("no convergence after {iterations} iterations: {detail}")]
    NonConvergence { iterations: usize, detail: String },

    /// The brute-force dual oracle only handles small atom counts.
    #[error("atom count {n} exceeds the limit of {max}")]
    AtomLimit { n: usize, max: usize },

    /// Unparseable or out-of-range divergence name/parameters.
    #[error("invalid divergence spec: {0}")]
    InvalidSpec(String),

    /// Malformed distribution or problem data.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl QuadError {
    /// True for errors caused by bad user input rather than solver trouble.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            QuadError::InvalidSpec(_)
                | QuadError::InvalidInput(_)
                | QuadError::Io(_)
                | QuadError::Csv(_)
                | QuadError::AtomLimit { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, QuadError>;
