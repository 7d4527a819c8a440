use thiserror::Error;

use crate::generator::GeneratorResult;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("NonHermitianInput: entry ({row}, {col}) differs from the conjugate of ({col}, {row}) by {deviation:e}")]
    NonHermitianInput {
        row: usize,
        col: usize,
        deviation: f64,
    },

    #[error("DimensionMismatch: expected dimension {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix must be square and non-empty, got {rows}x{cols}")]
    InvalidShape { rows: usize, cols: usize },

    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("StepTooSmall: finite-difference step {step:e} is below {floor:e}")]
    StepTooSmall { step: f64, floor: f64 },

    #[error("QuadratureNotConverged: order {order} reached with estimated error {estimated_error:e}")]
    QuadratureNotConverged {
        order: usize,
        estimated_error: f64,
        best: Box<GeneratorResult>,
    },

    #[error("DegenerateExtremalEigenvalues: extremal eigenvalues of the derivative are degenerate")]
    DegenerateExtremalEigenvalues,

    #[error("DegenerateSpectrum: eigenvalues {lower} and {upper} are degenerate")]
    DegenerateSpectrum { lower: usize, upper: usize },

    #[error("family provides no second derivative")]
    MissingSecondDerivative,
}

impl Error {
    /// True for errors that come from malformed input rather than numerics.
    pub fn is_input_violation(&self) -> bool {
        matches!(
            self,
            Error::NonHermitianInput { .. }
                | Error::DimensionMismatch { .. }
                | Error::InvalidShape { .. }
                | Error::NotNormalized { .. }
                | Error::InvalidParameter { .. }
        )
    }
}
