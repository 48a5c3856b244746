use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("truncation n_max = {n_max} inadequate for |alpha|^2 = {alpha_sq}: discarded weight {tail:.3e}")]
    Truncation { alpha_sq: f64, n_max: usize, tail: f64 },

    #[error("odd cat state is undefined at alpha = 0")]
    UndefinedCat,

    #[error("annihilation in mode {mode} left a zero vector")]
    ZeroVector { mode: usize },

    #[error("mode {mode} out of range for a {n_modes}-mode state")]
    InvalidMode { mode: usize, n_modes: usize },

    #[error("beamsplitter needs two distinct modes, got {0} twice")]
    SameMode(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("invalid {name} = {value}: {reason}")]
    InvalidParameter { name: &'static str, value: f64, reason: &'static str },

    #[error("|alpha|^2 = {alpha_sq} exceeds the oracle limit {limit} (dense truncation would not fit)")]
    OracleRange { alpha_sq: f64, limit: f64 },

    #[error("unsupported chain length {0}: only 2 or 4 links")]
    UnsupportedChain(usize),

    #[error("invalid state: {0}")]
    InvalidState(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_range(name: &'static str, value: f64, lo: f64, hi: f64, reason: &'static str) -> Result<()> {
    if value.is_finite() && value >= lo && value <= hi {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, value, reason })
    }
}
