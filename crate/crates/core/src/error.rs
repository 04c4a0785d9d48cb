use alloc::string::String;

use crate::ifs::Word;

pub type Result<T> = core::result::Result<T, FracError>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FracError {
    #[error("contraction ratio must lie in (0, 1), got {0}")]
    InvalidRatio(f64),

    #[error("ambient dimension must be 1, 2 or 3, got {0}")]
    UnsupportedDimension(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("an IFS needs at least two maps, got {0}")]
    TooFewMaps(usize),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("the empty word composes to the identity, which is not a contraction")]
    IdentityMap,

    #[error("symbol {symbol} out of range for an IFS with {maps} maps")]
    SymbolOutOfRange { symbol: u32, maps: usize },

    #[error("cell cap exceeded at depth {depth}: more than {cap} cells")]
    CellCapExceeded { depth: usize, cap: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("ratios {0} and {1} are not commensurable")]
    NotCommensurable(f64, f64),

    #[error(
        "no admissible subsystem up to depth {max_depth}: best dimension {best_dimension} \
         at exponent {best_exponent}, target {target}"
    )]
    HomogenizeFailed {
        max_depth: usize,
        best_dimension: f64,
        best_exponent: usize,
        target: f64,
    },

    #[error("word {0} is not part of the system")]
    WordNotFound(Word),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("scale {scale} is below the cloud resolution {resolution}")]
    ScaleBelowResolution { scale: f64, resolution: f64 },
}
