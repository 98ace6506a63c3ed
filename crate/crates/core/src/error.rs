use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("column {0} has (near-)zero l2 norm")]
    ZeroVarianceColumn(usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid subsample size: N = {n_sub} exceeds n = {n}")]
    InvalidSize { n_sub: usize, n: usize },

    #[error("not enough samples: need {needed}, have {available}")]
    InsufficientSamples { needed: usize, available: usize },

    #[error("cannot round weights: n = {n} is smaller than N = {n_sub}")]
    Infeasible { n: usize, n_sub: usize },

    #[error("index out of range: {0}")]
    IndexOutOfRange(usize),

    #[error("grouping mismatch: got {got} support sets, expected b*m = {expected}")]
    BadGrouping { got: usize, expected: usize },

    #[error("gram matrix is singular")]
    SingularGram,

    #[error("matrix is not symmetric")]
    NonSymmetric,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Short machine-readable error kind, used by the CLI's stderr JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::ZeroVarianceColumn(_) => "zero_variance_column",
            Error::DimensionMismatch(_) => "dimension_mismatch",
            Error::InvalidSize { .. } => "invalid_size",
            Error::InsufficientSamples { .. } => "insufficient_samples",
            Error::Infeasible { .. } => "infeasible",
            Error::IndexOutOfRange(_) => "index_out_of_range",
            Error::BadGrouping { .. } => "bad_grouping",
            Error::SingularGram => "singular_gram",
            Error::NonSymmetric => "non_symmetric",
            Error::InvalidConfig(_) => "invalid_config",
            Error::Io(_) => "io",
            Error::Parse(_) => "parse",
        }
    }
}
