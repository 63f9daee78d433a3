use thiserror::Error;

use crate::expr::{EvalError, ParseError};

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("evaluation failed at t = {t}: {source}")]
    EvalAt {
        t: f64,
        #[source]
        source: EvalError,
    },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("invalid domain [{start}, {end}]")]
    InvalidDomain { start: f64, end: f64 },
    #[error("invalid curve spec: {0}")]
    InvalidSpec(String),
    #[error("need at least {min} samples, got {got}")]
    TooFewSamples { min: usize, got: usize },
    #[error("curve has a singular point at t = {t}; supply nu explicitly")]
    SingularPoint { t: f64 },
    #[error("not a parameter change: t'(u) vanishes near u = {u}")]
    NotParameterChange { u: f64 },
    #[error("parameter change leaves the curve domain: t({u}) = {t}")]
    OutsideDomain { u: f64, t: f64 },
    #[error("affine map is singular (determinant {det})")]
    SingularAffine { det: f64 },
    #[error("diffeomorphism degenerates along the curve at t = {t} (Jacobian singular)")]
    DegenerateDiffeo { t: f64 },
    #[error("grid mismatch: {left} vs {right} samples")]
    GridMismatch { left: usize, right: usize },
    #[error("zero set appears non-finite ({count} roots on a {grid_n}-interval grid); refine or reject")]
    NonFiniteZeros { count: usize, grid_n: usize },
    #[error("not a zero point: f({t}) = {value}")]
    NotAZero { t: f64, value: f64 },
    #[error("contact order exceeds jet order {order} at t = {t}")]
    ContactOrderExceeded { t: f64, order: usize },
    #[error("degenerate: constant curve")]
    ConstantCurve,
    #[error("parity check requires a closed curve")]
    ParityRequiresClosed,
    #[error("cofactor hypothesis violated: {0}")]
    CofactorHypothesis(String),
    #[error("invalid germ data: {0}")]
    InvalidGerm(String),
    #[error("f must not vanish at 0")]
    FVanishesAtZero,
    #[error("requires a ≠ b")]
    RequiresDistinct,
    #[error("unknown gallery entry '{0}'")]
    UnknownEntry(String),
    #[error("gallery assumption failed: {0}")]
    AssumptionFailed(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Name of the module the error originates from.
    pub fn module(&self) -> &'static str {
        match self {
            Error::Parse(_) | Error::EvalAt { .. } | Error::Eval(_) => "expr",
            Error::InvalidDomain { .. }
            | Error::InvalidSpec(_)
            | Error::SingularPoint { .. }
            | Error::Json(_) => "legendre",
            Error::TooFewSamples { .. } | Error::GridMismatch { .. } => "reconstruct",
            Error::NotParameterChange { .. }
            | Error::OutsideDomain { .. }
            | Error::SingularAffine { .. }
            | Error::DegenerateDiffeo { .. } => "transform",
            Error::NonFiniteZeros { .. }
            | Error::NotAZero { .. }
            | Error::ContactOrderExceeded { .. }
            | Error::ConstantCurve
            | Error::ParityRequiresClosed
            | Error::CofactorHypothesis(_) => "signature",
            Error::InvalidGerm(_) | Error::FVanishesAtZero => "normalform",
            Error::RequiresDistinct | Error::UnknownEntry(_) | Error::AssumptionFailed(_) => {
                "examples"
            }
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) trait EvalAtExt<T> {
    fn at(self, t: f64) -> Result<T>;
}

impl<T> EvalAtExt<T> for std::result::Result<T, EvalError> {
    fn at(self, t: f64) -> Result<T> {
        self.map_err(|source| Error::EvalAt { t, source })
    }
}
