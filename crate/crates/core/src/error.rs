//! Crate-wide error type.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("register width {width} outside supported range 1..={max}")]
    WidthOutOfRange { width: usize, max: usize },

    #[error("width mismatch: expected {expected}, got {got}")]
    WidthMismatch { expected: usize, got: usize },

    #[error("gate site {site} out of range for width {width}")]
    SiteOutOfRange { site: usize, width: usize },

    #[error("duplicate sites in one gate: {0:?}")]
    DuplicateSites(Vec<usize>),

    #[error("width {width} exceeds exhaustive check cap {cap}")]
    CheckCapExceeded { width: usize, cap: usize },

    #[error("malformed state spec `{0}` (expected basis:<bits>, uniform, or random:<seed>)")]
    StateSpec(String),

    #[error("history has {got} epochs, program defines {expected}")]
    HistoryLength { expected: usize, got: usize },

    #[error("bad history pattern at epoch {epoch}: expected {expected}, got {got}")]
    HistoryPattern {
        epoch: usize,
        expected: String,
        got: String,
    },

    #[error("grain does not match: {0}")]
    GrainMismatch(String),

    #[error("{tuples} history tuples exceed exhaustive cap {cap}")]
    ExhaustiveCapExceeded { tuples: u128, cap: usize },

    #[error("sampled evaluation requires a program of reversible steps only")]
    SampledNeedsReversible,

    #[error(
        "weak decoherence fails (max |Re offdiag| = {max_re_offdiag:.3e} > {tolerance:.3e}); \
         refusing to assign history probabilities"
    )]
    NotDecoherent {
        max_re_offdiag: f64,
        tolerance: f64,
    },

    #[error("matrix is not unitary: ‖U†U − I‖ = {deviation:.3e}")]
    NotUnitary { deviation: f64 },

    #[error("width {width} exceeds dense-matrix cap {cap}")]
    DenseCapExceeded { width: usize, cap: usize },

    #[error("dimension mismatch: matrix is {matrix}, state is {state}")]
    DimensionMismatch { matrix: usize, state: usize },

    #[error("prefix cap {l_max} exceeds enumeration limit {max}")]
    PrefixCapExceeded { l_max: usize, max: usize },

    #[error("step budget must be at least 1")]
    ZeroBudget,

    #[error("witness rejected: {0}")]
    WitnessRejected(String),
}
