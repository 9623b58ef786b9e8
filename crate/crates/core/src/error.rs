use thiserror::Error;

/// Errors produced by the toolkit.
///
/// Variants fall into two families: validation errors (bad input, exit code 1
/// from the CLI) and numeric failures (exit code 2).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("symbol {value} out of range for M={m}: valid ranks are 0..={max}")]
    RankOutOfRange { value: u64, m: usize, max: u64 },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("block size M={0} unsupported: must satisfy 1 <= M <= 20")]
    BlockSize(usize),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("length mismatch: {0}")]
    Mismatch(String),

    #[error("exhaustive search over {m}! permutations refused (limit M <= {limit})")]
    TooLarge { m: usize, limit: usize },

    #[error("series did not converge after {terms} terms (last term {last_term:e}, partial sum {partial_sum:e})")]
    SeriesNotConverged {
        terms: usize,
        last_term: f64,
        partial_sum: f64,
    },

    #[error("Fisher matrix is not positive definite (J11={j11:e}, J12={j12:e}, J22={j22:e}, det={det:e})")]
    SingularFisher {
        j11: f64,
        j12: f64,
        j22: f64,
        det: f64,
    },

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// True for failures of a numerical procedure rather than of the input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::SeriesNotConverged { .. } | Error::SingularFisher { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
