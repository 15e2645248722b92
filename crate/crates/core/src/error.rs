use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("unknown graph `{0}`")]
    UnknownGraph(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("regularity assumption violated (sum margin {sum:.6e}, difference margin {diff:.6e})")]
    AssumptionViolated { sum: f64, diff: f64 },

    #[error("invalid activity set: {0}")]
    InvalidActivitySet(String),

    #[error("best-response iteration did not converge after {iterations} iterations (last change {change:.3e})")]
    NoConvergence { iterations: usize, change: f64 },

    #[error("matrix is not positive definite (smallest eigenvalue {0:.6e})")]
    NotPositiveDefinite(f64),

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("baseline utilities vanish: {0}")]
    ZeroBaseline(String),

    #[error("spectral gap is zero; the bound is undefined")]
    DegenerateGap,

    #[error("{0}")]
    Precondition(String),

    #[error("scenario: {0}")]
    Scenario(String),
}

pub type Result<T> = std::result::Result<T, Error>;
