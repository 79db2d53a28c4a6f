//! Crate-wide error type.

use thiserror::Error;

use crate::graph::Violation;

/// Errors produced by graph construction, parsing, numerical kernels and the
/// oracles.
#[derive(Debug, Error)]
pub enum Error {
    /// A graph failed validation; the violations describe each failed check.
    #[error("graph failed validation: {}", format_violations(.0))]
    InvalidGraph(Vec<Violation>),

    /// A graph could not be constructed from the given pieces.
    #[error("cannot build graph: {0}")]
    Construction(String),

    /// Text input could not be parsed.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// The eigensolver was handed a matrix that is not symmetric.
    #[error("matrix is not symmetric (defect {defect:e})")]
    NotSymmetric { defect: f64 },

    /// An iterative kernel did not converge within its iteration cap.
    #[error("eigensolver did not converge (achieved residual {residual:e})")]
    NoConvergence { residual: f64 },

    /// A kernel was asked for a dimension outside its supported range.
    #[error("dimension {dim} exceeds the supported maximum {max}")]
    DimensionCap { dim: usize, max: usize },

    /// Mismatched shapes between operands.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// An operation that needs a nonzero field received an all-zero one.
    #[error("field is identically zero")]
    ZeroField,

    /// Paired diagnostics require D1-orthogonal inputs.
    #[error("inputs are not D1-orthogonal (relative inner product {cosine:e})")]
    NotD1Orthogonal { cosine: f64 },

    /// A rounding step found no usable candidate.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// An oracle was called outside its documented domain.
    #[error("oracle domain error: {0}")]
    OracleDomain(String),

    /// A random generator exhausted its retry budget.
    #[error("no connected graph sampled within {attempts} attempts")]
    ConnectivityRetries { attempts: usize },

    /// A value that must be finite was not.
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
}

fn format_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
