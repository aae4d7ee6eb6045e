use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("chain length must be odd and at least 3, got {0}")]
    InvalidChainLength(usize),

    #[error("parameter `{name}` must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },

    #[error("basis index must lie in 1..=8, got {0}")]
    BasisIndexOutOfRange(usize),

    #[error("mode k={k} is not on the momentum grid 1..={max} of an N={n_sites} chain")]
    ModeOutOfGrid { k: usize, max: usize, n_sites: usize },

    #[error("mode data belong to different momenta ({0} vs {1})")]
    ModeMismatch(usize, usize),

    #[error("invalid time grid: {0}")]
    InvalidTimes(String),

    #[error("invalid range: {0}")]
    InvalidRange(String),

    #[error("scale factor must be positive and finite, got {0}")]
    InvalidScale(f64),

    #[error("state is not normalised: squared norm {0}")]
    NotNormalized(f64),

    #[error("matrix is not a valid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("eigenvalue {0} is below the PSD tolerance")]
    NegativeEigenvalue(f64),

    #[error("invalid subsystem selection: {0}")]
    InvalidPartition(String),
}
