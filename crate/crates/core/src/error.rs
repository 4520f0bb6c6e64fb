use thiserror::Error;

pub type Result<T> = std::result::Result<T, GlsError>;

#[derive(Debug, Error)]
pub enum GlsError {
    #[error("{what} = {value} is outside the domain ({expected})")]
    Domain {
        what: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("moment of order {p} diverges")]
    Divergent { p: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("backend '{0}' does not support this operation")]
    UnsupportedBackend(String),

    #[error("sample batch is empty")]
    EmptyBatch,

    #[error("grid truncated at M = {m} reaches psi(q(M)) = {psi_at_end}, below x = {x}")]
    TruncationInsufficient { m: usize, psi_at_end: f64, x: f64 },

    #[error("no K in the grid (largest {largest}) dominates the empirical tail")]
    NoFeasibleK { largest: f64 },

    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("group axiom violated: {0}")]
    AxiomViolation(String),

    #[error("generating function is not declared monotone: {0}")]
    NonMonotone(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl GlsError {
    pub(crate) fn domain(what: &'static str, value: f64, expected: &'static str) -> Self {
        GlsError::Domain {
            what,
            value,
            expected,
        }
    }
}
