use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} = {value} is outside [{lo}, {hi}]")]
    Range {
        what: &'static str,
        value: i64,
        lo: i64,
        hi: i64,
    },

    #[error("n = {n} exceeds the cap of {cap} for {what}")]
    Size { what: &'static str, n: usize, cap: usize },

    #[error("domain error: {0}")]
    Domain(String),

    /// The set of stopping ranks at round `t` was not a symmetric interval.
    #[error("stopping set at t = {t} is not a symmetric interval: {ranks:?}")]
    Structural { t: usize, ranks: Vec<usize> },

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A stopping rule never stopped, or stopped outside the horizon.
    #[error("contract violated: {0}")]
    Contract(String),
}

impl Error {
    pub(crate) fn range(what: &'static str, value: usize, lo: usize, hi: usize) -> Self {
        Error::Range {
            what,
            value: value as i64,
            lo: lo as i64,
            hi: hi as i64,
        }
    }
}
