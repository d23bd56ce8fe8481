use std::path::PathBuf;

/// Errors produced by the transforms, selectors and file readers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("length {len} is not a power of two")]
    NotPowerOfTwo { len: usize },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("non-finite value at position {index}")]
    NonFinite { index: usize },

    #[error("invalid wavelet index: {0}")]
    InvalidIndex(String),

    #[error("budget {budget} exceeds the number of basis vectors {n}")]
    BudgetTooLarge { budget: usize, n: usize },

    #[error("invalid norm parameter: {0}")]
    InvalidNorm(String),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("instance size {n} exceeds the cap {cap}; {hint}")]
    SizeCap {
        n: usize,
        cap: usize,
        hint: &'static str,
    },

    #[error("unknown filter bank '{0}' (expected haar, db2, db3 or db4)")]
    UnknownFilter(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("block (j={j}, p={p}): {source}")]
    Block {
        j: u32,
        p: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

/// `log2(n)` for a power of two `n >= 1`.
pub(crate) fn checked_log2(n: usize) -> Result<u32> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo { len: n });
    }
    Ok(n.trailing_zeros())
}
