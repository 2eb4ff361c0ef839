use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("vector is not unit length (norm {norm})")]
    NotUnit { norm: f64 },

    #[error("quadrature did not converge: estimated error {estimate:e} after {evaluations} evaluations")]
    QuadratureDiverged { estimate: f64, evaluations: usize },

    #[error("optimizer did not converge within {iterations} iterations (bracket width {width:e})")]
    NoConvergence { iterations: usize, width: f64 },

    #[error("cannot parse exact value `{0}`")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
