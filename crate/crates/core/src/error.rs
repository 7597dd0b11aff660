use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("not a Turing point: {0}")]
    NotTuring(String),
    #[error("eigenvalue -1 is not algebraically double and geometrically simple: {0}")]
    NotDoubleEigenvalue(String),
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("singular Jacobian")]
    SingularJacobian,
    #[error("supercritical: c3 = {0} >= 0, no nontrivial homoclinic exists")]
    Supercritical(f64),
    #[error("shooting classes not bracketed: {0}")]
    ClassificationAmbiguous(String),
    #[error("integrator step underflow at s = {0}")]
    StepFailure(f64),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
