use thiserror::Error;

/// Which marginal of a joint pair failed a check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Marginal {
    X,
    Y,
}

impl std::fmt::Display for Marginal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Marginal::X => f.write_str("X"),
            Marginal::Y => f.write_str("Y"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("no unique stationary distribution: {0}")]
    NoUniqueStationary(String),

    /// The marginal process is not Markov, so the three-entropy-rate formula
    /// does not give the exact MIR. The AMIR of the joint chain is still exact
    /// and is carried along.
    #[error(
        "marginal {marginal} of the joint chain is not Markov (deviation {deviation:.3e}); \
         use the hidden-pair route for MIR (amir = {amir_bits} bits)"
    )]
    MarginalNotMarkov { marginal: Marginal, deviation: f64, amir_bits: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code: 2 validation, 3 mathematical precondition, 4 internal numeric.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidDistribution(_)
            | Error::InvalidInput(_)
            | Error::InsufficientData(_)
            | Error::DegenerateData(_)
            | Error::Io(_)
            | Error::Json(_) => 2,
            Error::NoUniqueStationary(_) | Error::MarginalNotMarkov { .. } => 3,
            Error::Numeric(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
