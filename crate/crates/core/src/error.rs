use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("integer overflow while computing {0}")]
    Overflow(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("Newton iteration for the {n}-point Gauss-Legendre rule did not converge")]
    NonConvergence { n: usize },

    #[error("vector of norm {norm} is not on the unit sphere")]
    NonUnitVector { norm: f64 },

    #[error("expected a point in R^{expected}, got length {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("filter `{0}` is not a proper filter (it must equal 1 on [0,1])")]
    ImproperFilter(String),

    #[error("cubature rule must be certified to degree {required}; {found}")]
    UncertifiedRule { required: usize, found: String },

    #[error("no rule generator for S^{0}; load rules from files instead")]
    UnsupportedDimension(usize),

    #[error("discrete approximation is not zonal about the pole (relative defect {defect:.3e})")]
    NotZonal { defect: f64 },

    #[error("unknown filter `{0}`")]
    UnknownFilter(String),

    #[error(transparent)]
    RuleParse(#[from] RuleParseError),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Diagnostics for malformed cubature rule files.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum RuleParseError {
    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error("line {line}: malformed node record: {reason}")]
    MalformedLine { line: usize, reason: String },

    #[error("header declares {declared} nodes but file holds {found}")]
    CountMismatch { declared: usize, found: usize },

    #[error("line {line}: non-unit node (|y| = {norm:.17e})")]
    NonUnitNode { line: usize, norm: f64 },

    #[error("line {line}: non-positive weight {weight:e}")]
    NonPositiveWeight { line: usize, weight: f64 },

    #[error("weight normalization: weights sum to {sum:.17e}, expected 1")]
    WeightNormalization { sum: f64 },
}
