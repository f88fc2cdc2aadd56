use thiserror::Error;

use crate::linprog::LpError;
use crate::scalar::ScalarError;

/// Failures of the analyses. Model defects found by validation are data, not
/// errors; see [`crate::market::validate_model`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("input error: {0}")]
    Input(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("operation needs rational data: {0}")]
    NotRational(String),
    #[error("search budget exceeded: {needed} candidates, budget {budget}")]
    BudgetExceeded { needed: f64, budget: f64 },
    #[error("search budget exceeded: no admissible q up to {0}")]
    SearchBudgetExceeded(String),
    #[error("the model admits a real arbitrage")]
    ModelHasArbitrage,
    #[error("the model admits an integer arbitrage")]
    ModelHasIntegerArbitrage,
    #[error("operation needs a one-period model")]
    NotOnePeriod,
    #[error("process is not adapted: {0}")]
    NotAdapted(String),
    #[error("terminal value of the price process differs from the claim")]
    TerminalMismatch,
    #[error("measure is not a martingale measure: {0}")]
    NotMartingaleMeasure(String),
    #[error("lattice generators are linearly dependent")]
    DependentGenerators,
    #[error("internal invariant violated: {0}")]
    InvariantViolation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
