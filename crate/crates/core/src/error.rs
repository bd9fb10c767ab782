use thiserror::Error;

/// Errors raised by the scoring engines, search routines and data model.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("matrix not positive definite for model {model}")]
    NotInvertible { model: String },

    #[error("negative hessian at the expansion point is not positive definite")]
    NotConcaveAtExpansion,

    #[error("non-concave direction encountered during Newton iterations")]
    NotConcave,

    #[error("dispersion estimate {value} is not positive")]
    NonPositiveDispersion { value: f64 },

    #[error("degenerate response: {0}")]
    DegenerateResponse(String),

    #[error("response entry {index} is not finite")]
    NonFiniteResponse { index: usize },

    #[error("model {model} violates the model-space constraints")]
    InvalidModel { model: String },

    #[error("refusing to enumerate 2^{groups} models (limit {limit}); use Gibbs sampling")]
    RefuseEnumeration { groups: usize, limit: usize },

    #[error("Newton iterations did not converge after {iterations} steps (gradient norms {trace:?})")]
    NoConvergence { iterations: usize, trace: Vec<f64> },

    #[error("non-finite Newton step at iteration {iteration}")]
    NonFiniteStep { iteration: usize, partial: Vec<f64> },

    #[error("quadrature did not reach tolerance {tolerance:e} (estimate {estimate}, error {error:e})")]
    ToleranceNotMet { tolerance: f64, estimate: f64, error: f64 },

    #[error("cyclic group constraints: {}", format_cycle(.cycle))]
    CyclicConstraints { cycle: Vec<usize> },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),
}

fn format_cycle(cycle: &[usize]) -> String {
    cycle
        .iter()
        .map(|g| (g + 1).to_string())
        .collect::<Vec<_>>()
        .join(" -> ")
}

pub type Result<T> = std::result::Result<T, Error>;
