use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid trit {value:?} at position {position}")]
    InvalidTrit { position: usize, value: char },

    #[error("a trit string needs at least one site")]
    EmptyTritString,

    #[error("basis index {index} out of range for {n_sites} sites")]
    IndexOutOfRange { index: usize, n_sites: usize },

    #[error("site {site} out of range 1..={n_sites}")]
    SiteOutOfRange { site: usize, n_sites: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not unitary (max entry deviation of U^dag U from I is {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{n_sites} sites ({what}) exceed the configured cap of {cap} sites")]
    SizeCap {
        n_sites: usize,
        cap: usize,
        what: &'static str,
    },

    #[error("coefficients do not describe a cross-Kerr diagonal (residual {residual:e})")]
    NotCrossKerr { residual: f64 },

    #[error("series of length {len} is too short (need at least {min})")]
    SeriesTooShort { len: usize, min: usize },

    #[error("spectrum length {0} is not divisible by 3")]
    NotTriplet(usize),

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
