use thiserror::Error;

/// Everything that can go wrong in the library.
///
/// Variants are grouped by the exit code the command-line front end maps them to:
/// bad input (1), numerical breakdown (2), failed verification (3).
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("grid functions live on different domains")]
    DomainMismatch,
    #[error("point ({0}, {1}) lies outside the domain")]
    OutsideDomain(f64, f64),
    #[error("function is not differentiable at ({0}, {1})")]
    NonSmooth(f64, f64),
    #[error("causality violation: {0}")]
    Causality(String),
    #[error("point is not on the boundary graph: {0}")]
    NotOnBoundary(String),
    #[error("need at least {need} finite boundary samples, got {got}")]
    InsufficientBoundary { got: usize, need: usize },
    #[error("group word uses unknown generator '{0}'")]
    UnknownGenerator(String),
    #[error("orbit exceeds the cap of {0} points")]
    OrbitCap(usize),

    #[error("solver did not converge after {iterations} iterations (residual {residual:.3e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("convexity lost at iteration {0}")]
    ConvexityLost(usize),
    #[error("negativity lost at iteration {0}")]
    NegativityLost(usize),
    #[error("no bracketing interval: {0}")]
    NoBracket(String),
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("linear solve failed: {0}")]
    Singular(String),

    #[error("gauge function rejected: {0}")]
    GaugeRejected(String),
    #[error("verification failed: {0}")]
    Verification(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NotConverged { .. }
            | Error::ConvexityLost(_)
            | Error::NegativityLost(_)
            | Error::NoBracket(_)
            | Error::Degenerate(_)
            | Error::Singular(_) => 2,
            Error::GaugeRejected(_) | Error::Verification(_) => 3,
            _ => 1,
        }
    }
}
