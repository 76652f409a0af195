use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("cannot coarsen by refine: level {from} to level {to}")]
    CannotCoarsen { from: u32, to: u32 },

    #[error("values length {found} does not match 2^{level}")]
    LengthMismatch { level: u32, found: usize },

    #[error("level {level} exceeds the maximum supported level {max}")]
    LevelTooLarge { level: u32, max: u32 },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("invalid exponent {value}: {reason}")]
    InvalidExponent { value: f64, reason: &'static str },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("overlapping dyadic sets")]
    OverlappingSets,

    #[error("empty set in list")]
    EmptySet,

    #[error("dyadic interval index {index} out of range at level {level}")]
    InvalidInterval { level: u32, index: u64 },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("weight {index} = {value} is outside (0, 1]")]
    InvalidWeight { index: usize, value: f64 },

    #[error("empty coefficient vector")]
    EmptyCoefficients,

    #[error("empty family")]
    EmptyFamily,

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("degenerate coefficient vector")]
    DegenerateCoefficients,

    #[error("negative entry {index} = {value}")]
    NegativeEntry { index: usize, value: f64 },

    #[error("not normalized: norm {norm} differs from 1")]
    NotNormalized { norm: f64 },

    #[error("norming function violates its constraint: {0}")]
    InvalidNormingFunction(String),

    #[error("basis functions {0} and {1} have overlapping supports")]
    OverlappingSupports(usize, usize),

    #[error("basis function {0} is identically zero")]
    ZeroFunction(usize),

    #[error("basis is missing the `{0}` tag")]
    MissingTag(&'static str),

    #[error("invalid Haar index ({n}, {k})")]
    InvalidHaarIndex { n: u32, k: u64 },

    #[error("invalid Rademacher index {0}")]
    InvalidRademacher(u32),

    #[error("invalid digit blocks: {0}")]
    InvalidDigitBlocks(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("internal error: {0}")]
    Internal(String),
}
