//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("algebra mismatch")]
    AlgebraMismatch,

    #[error("log branch point")]
    LogBranchPoint,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("structural constraint violated: {0}")]
    Constraint(String),

    #[error("\u{3b5} too large: vertical block degenerate")]
    DegenerateVerticalBlock,

    #[error("family blows up non-polynomially on ladder")]
    NonPolynomialBlowup,

    #[error("no distributional shadow detected")]
    NoShadow,

    #[error("cell budget exhausted: achieved error estimate {achieved:.3e} exceeds tol {tol:.3e}")]
    CellBudgetExhausted { achieved: f64, tol: f64 },

    #[error("extrapolation did not converge: {0}")]
    ExtrapolationFailed(String),

    #[error("curve exits chart at t = {0}")]
    CurveExitsChart(f64),

    #[error("open curve: endpoint gap {0:.3e}")]
    OpenCurve(f64),

    #[error("missing differential callback")]
    MissingDifferential,

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
