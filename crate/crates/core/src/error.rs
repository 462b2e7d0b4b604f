use alloc::string::String;

/// Errors reported by the screening library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("need at least {min} observations, got {got}")]
    TooSmall { min: usize, got: usize },
    #[error("{got} observations exceeds the configured limit of {max}")]
    TooLarge { max: usize, got: usize },
    #[error("x has {x} values but y has {y}")]
    LengthMismatch { x: usize, y: usize },
    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },
    #[error("duplicate observation identifier {0}")]
    DuplicateId(usize),
    #[error("index {index} out of range for {len} observations")]
    OutOfRange { index: usize, len: usize },
    #[error("zero variance in the {0} margin")]
    ZeroVariance(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("unknown series {0:?}")]
    UnknownSeries(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

macro_rules! invalid {
    ($($arg:tt)*) => {
        $crate::Error::InvalidArgument(alloc::format!($($arg)*))
    };
}
pub(crate) use invalid;
