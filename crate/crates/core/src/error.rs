use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// Newton iteration did not reach tolerance. `trace` holds the scaled
    /// residual norm after every iterate, starting with the predictor.
    #[error("Newton iteration failed to converge after {iterations} iterations (last residual {last_residual:e})")]
    NonConvergence {
        iterations: usize,
        last_residual: f64,
        trace: Vec<f64>,
    },

    #[error("singular linear system: {0}")]
    Singular(String),

    /// A state left the admissible set (for example nonpositive density or pressure).
    #[error(
        "inadmissible state in element {element} at quadrature point {point} (x = {x}): {detail}"
    )]
    Inadmissible {
        element: usize,
        point: usize,
        x: f64,
        detail: String,
    },

    #[error("invalid configuration: {0}")]
    Configuration(String),

    #[error("config line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("balance ledger has no entries")]
    EmptyLedger,

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
