use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid weight: {0}")]
    InvalidWeight(String),

    #[error("weight ratio condition violated at index {index}: omega[n+1]/omega[n] = {ratio}")]
    WeightConditionViolation { index: usize, ratio: f64 },

    #[error("series live in different weighted spaces")]
    SpaceMismatch,

    #[error("zero vector: {0}")]
    ZeroVector(String),

    #[error("point {re}+{im}i lies outside the admissible domain ({what})")]
    OutsideDomain { re: f64, im: f64, what: &'static str },

    #[error("ill-conditioned Gram system: condition estimate {condition:e}, determinant estimate {det:e}")]
    IllConditionedGram { condition: f64, det: f64 },

    #[error("linearly dependent family: det(G) / prod(G_ii) = {ratio:e}")]
    DependentFamily { ratio: f64 },

    #[error("determinant path limited to {max} vectors, got {size}; use the projection path")]
    UseProjectionPath { size: usize, max: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn outside(z: num_complex::Complex64, what: &'static str) -> Self {
        Error::OutsideDomain {
            re: z.re,
            im: z.im,
            what,
        }
    }
}
