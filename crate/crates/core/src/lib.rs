//! Extended φ-divergence risk quadrangles on finite empirical distributions.
//!
//! Risk, deviation, regret, error and statistic are available through a primal
//! route (convex minimization over the conjugate), a brute-force dual route
//! (maximization over the risk envelope) and closed forms for every catalog entry.

pub mod applications;
pub mod casestudy;
pub mod closed_form;
pub mod divergence;
pub mod dual;
pub mod empirical;
pub mod io;
pub mod error;
pub mod optimize;
pub mod primal;
pub mod recovery;
pub mod scalar;
pub mod statistic;
pub mod verify;
pub mod svg;
mod selection;

pub use divergence::{DivergenceKind, DivergenceSpec, ExtendedReal, SubgradientInterval};
pub use empirical::EmpiricalDistribution;
pub use error::{QuadError, Result};
pub use primal::QuadrangleResult;
