//! Error types shared across the pricing engine.

use thiserror::Error;

/// Errors raised by curve construction, analytics and the pricers.
#[derive(Debug, Error)]
pub enum PricingError {
    /// An argument is outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Inputs are individually valid but jointly inconsistent with the model
    /// (e.g. negative forward variance, negative basket variance).
    #[error("model error: {0}")]
    Model(String),

    /// A volatility smile is missing for the requested (expiry, start, end).
    #[error("no volatility smile for (expiry={expiry}, start={start}, end={end})")]
    MissingVol { expiry: f64, start: f64, end: f64 },

    /// A correlation entry is missing for the requested key.
    #[error("no correlation configured for {0}")]
    MissingCorrelation(String),

    /// Structural problem in an input object (bad pillar ordering, empty smile, ...).
    #[error("invalid input: {0}")]
    Invalid(String),

    /// A quadrature grid cannot hold the integrand (mass at the boundary).
    #[error("grid refinement required: {0}")]
    Grid(String),

    /// Failure while reading or parsing an input file.
    #[error("{file}: {message}")]
    Io { file: String, message: String },
}

pub type Result<T> = std::result::Result<T, PricingError>;
