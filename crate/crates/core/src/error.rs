//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by protocol operations, configuration validation and
/// the simulation orchestrator.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Multiplicative inverse of zero requested.
    #[error("cannot invert zero in F_{modulus}")]
    ZeroInverse { modulus: u64 },

    /// A linear-system or vector dimension did not match.
    #[error("dimension mismatch: {context} (expected {expected}, got {got})")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    /// The interpolation matrix was singular (duplicate evaluation points).
    #[error("singular system: evaluation points must be distinct and nonzero")]
    SingularMatrix,

    /// Fewer answers than unknowns; the subpacket cannot be recovered.
    #[error("underdetermined decode: got {got} answers, need {required}")]
    Underdetermined { got: usize, required: usize },

    /// A stored symbol fell outside the expected polynomial degree window.
    #[error("degree structure violated: symbol of database {database} is not explained by the degree window [{low}, {high}]")]
    DegreeStructure { database: usize, low: i64, high: i64 },

    /// A subpacket or segment index was outside its valid range.
    #[error("{what} index {index} out of range [1, {max}]")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        max: usize,
    },

    /// One user sent two updates for the same permuted position.
    #[error("duplicate write position: permuted (subpacket {subpacket}, segment {segment}) appears twice in one user's tuples")]
    DuplicateWritePosition { subpacket: usize, segment: usize },

    /// Invalid system or simulation configuration.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A brute-force computation would exceed its size guard.
    #[error("size guard exceeded: {0}")]
    SizeGuard(String),

    /// A round trace was incomplete or inconsistent.
    #[error("incomplete trace: {0}")]
    Trace(String),

    /// A simulation correctness oracle failed; diagnostic included.
    #[error("oracle violation: {0}")]
    OracleViolation(String),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
