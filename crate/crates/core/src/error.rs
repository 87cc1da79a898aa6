use thiserror::Error;

/// Errors produced by the numerical routines of this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error(
        "quadrature did not converge after {subdivisions} subdivisions \
         (estimate {estimate:e}, error {error:e}, requested {requested:e})"
    )]
    Quadrature {
        subdivisions: usize,
        estimate: f64,
        error: f64,
        requested: f64,
    },

    #[error("degenerate density: h({sigma}) = 0")]
    DegenerateDensity { sigma: f64 },

    #[error("character too short: index {needed} requires prime {prime}, only {available} primes given")]
    CharacterTooShort {
        needed: u64,
        prime: u64,
        available: usize,
    },

    #[error("series is not {d}-smooth; offending indices: {offending:?}")]
    NotSmooth { d: usize, offending: Vec<u64> },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("degenerate symbol: {0}")]
    DegenerateSymbol(String),

    #[error("truncation error: {0}")]
    Truncation(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid measure spec: {0}")]
    InvalidMeasure(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
