use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A diagonal entry of a triangular factor fell below the singularity floor.
    #[error(
        "singular triangular factor: |R[{index},{index}]| = {magnitude:e} is below floor {floor:e}"
    )]
    SingularMatrix {
        index: usize,
        magnitude: f64,
        floor: f64,
    },

    #[error("ill-conditioned {what}: condition estimate {condition:e}")]
    Conditioning { what: &'static str, condition: f64 },

    #[error("Hermitian pencil has no finite eigenvalue on the range of B")]
    DegeneratePencil,

    #[error("fewer than {required} positive weights (found {found})")]
    TooFewWeights { required: usize, found: usize },

    #[error("pole at x = {x}")]
    Pole { x: Complex64 },

    #[error("pole at sample node {index} (x = {x})")]
    PoleAtSample { index: usize, x: Complex64 },

    #[error("support point selection failed: {0}")]
    SupportSelection(String),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }
}
