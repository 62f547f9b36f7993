//! Error types shared across the library.

use thiserror::Error;

/// Errors raised by field, operator, solver and evaluator contracts.
#[derive(Debug, Clone, Error)]
pub enum TgvError {
    /// Two fields that must share a grid do not.
    #[error("geometry mismatch: {0}")]
    GeometryMismatch(String),

    /// A precondition on an argument was violated.
    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// A kernel fails the admissibility check required for deblurring.
    #[error("kernel not admissible: {0}")]
    KernelNotAdmissible(String),

    /// An iterate became non-finite; usually a step-size misconfiguration.
    #[error("solver diverged: variable `{variable}` became non-finite at iteration {iteration}")]
    Divergence {
        variable: &'static str,
        iteration: usize,
    },

    /// The TGV evaluator hit its iteration cap before certifying the value.
    #[error("evaluator did not converge: best value {best_value}, residual {residual}")]
    EvaluatorDidNotConverge { best_value: f64, residual: f64 },
}

pub type Result<T> = std::result::Result<T, TgvError>;
