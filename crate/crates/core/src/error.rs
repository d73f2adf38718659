use thiserror::Error;

/// Errors raised by the composite-fermion toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid mode configuration: {0}")]
    InvalidConfig(String),

    #[error("basis of {size} states exceeds the limit of {limit} states")]
    BasisTooLarge { size: u128, limit: usize },

    #[error("invalid structure function: {0}")]
    InvalidStructureFunction(String),

    #[error("structure function is tabulated up to n = {available}, but n = {requested} is required")]
    StructureFunctionRange { requested: usize, available: usize },

    #[error("{sector} mode {mode} out of range ({count} modes)")]
    ModeOutOfRange {
        sector: &'static str,
        mode: usize,
        count: usize,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("structural matrix is not normalized: Tr(ΦΦ†) = {0}")]
    NotNormalized(f64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degeneracy pattern mismatch: {0}")]
    PatternMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
