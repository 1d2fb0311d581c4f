use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid objective spec: {0}")]
    InvalidSpec(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("projection onto the minimizer set is not unique at this point")]
    DegenerateProjection,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("step size {gamma} outside the stability range (0, {upper})")]
    OutOfStabilityRange { gamma: f64, upper: f64 },

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("eigenvalue iteration did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("series never enters the window [{lo:e}, {hi:e}]")]
    InsufficientDecay { lo: f64, hi: f64 },

    #[error("only {points} points in the fit window, need at least {needed}")]
    InsufficientData { points: usize, needed: usize },

    #[error("every sample in the region was skipped")]
    DegenerateRegion,

    #[error("point is not near the minimizer set (gradient norm {grad_norm:e})")]
    NotNearMinimizer { grad_norm: f64 },

    #[error("line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}
