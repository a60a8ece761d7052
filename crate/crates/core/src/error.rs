//! Error types shared across the crate.

use std::path::PathBuf;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    #[error("degenerate coupling: {0}")]
    DegenerateCoupling(String),

    #[error("out of range: {0}")]
    OutOfRange(String),

    /// Population escaped into the top Fock levels; the truncation `n_max`
    /// is too small for the requested evolution.
    #[error(
        "truncation leakage: population {population:.3e} in the top two Fock \
         levels at t = {time:.6} (n_max = {n_max}); increase n_max"
    )]
    TruncationLeakage {
        time: f64,
        population: f64,
        n_max: usize,
    },

    /// A numerical self-check failed (unitarity drift, broken exact identity).
    #[error("numerical guard: {0}")]
    NumericalGuard(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI: 3 for numeric guards, 2 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::TruncationLeakage { .. } | Error::NumericalGuard(_) => 3,
            _ => 2,
        }
    }
}
