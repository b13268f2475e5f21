use thiserror::Error;

/// Errors produced by the geometry, spectral and optimization layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("scale factor must be positive, got {0}")]
    NonPositiveScale(f64),
    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),
    #[error("grid too coarse: inradius {inradius} <= 2h = {two_h}")]
    ResolutionTooCoarse { inradius: f64, two_h: f64 },
    #[error("eigensolver did not converge: {0}")]
    SolverNoConvergence(String),
    #[error("unknown functional `{0}`")]
    UnknownFunctional(String),
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("functional fails the optimizer hypotheses: {0}")]
    HypothesisFailed(String),
    #[error("runs are not comparable: {0}")]
    MismatchedRuns(String),
    #[error("missing threshold estimate: {0}")]
    MissingEstimate(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid body description: {0}")]
    InvalidBody(String),
}

pub type Result<T> = std::result::Result<T, Error>;
