use thiserror::Error;

/// Errors raised by the precoding library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A retained singular value is zero (or numerically zero), so the
    /// geometric mean and the GMD rotations are undefined.
    #[error("rank deficient: singular value {index} is {value:e}")]
    RankDeficient { index: usize, value: f64 },

    /// The geometric mean fell outside the interval spanned by the two
    /// diagonal entries of a Givens stage. Only reachable through a pivot
    /// selection bug or corrupted input.
    #[error("geometric mean {r_bar} outside [{lo}, {hi}]")]
    PivotOutOfRange { r_bar: f64, lo: f64, hi: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
