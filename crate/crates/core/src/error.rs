use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("input contains NaN or infinite entries")]
    NonFinite,

    #[error("{routine} did not converge after {iterations} iterations")]
    NoConvergence { routine: &'static str, iterations: usize },

    #[error("matrix is not unitary (residual {residual:e})")]
    NotUnitary { residual: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension {dim} exceeds the cap {cap} for {what}")]
    TooLarge { what: &'static str, dim: usize, cap: usize },

    #[error("rank decision is ambiguous (relative residual {ratio:e})")]
    RankDetection { ratio: f64 },

    #[error("set is not closed under products and inverses: {0}")]
    NotAGroup(String),

    #[error("central element stayed degenerate after {attempts} attempts")]
    DegenerateSpectrum { attempts: usize },

    #[error("hypothesis not verified: {0}")]
    HypothesisUnverified(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
