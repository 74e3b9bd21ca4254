use thiserror::Error;

use crate::Point;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point {point:?} (or its difference stencil) lies outside the chart domain")]
    Domain { point: Point },

    #[error("metric is not positive definite at {point:?} (smallest eigenvalue {min_eigenvalue:e})")]
    SingularMetric { point: Point, min_eigenvalue: f64 },

    #[error("finite-difference step underflow at {point:?}")]
    DerivativeFailure { point: Point },

    #[error("plane is degenerate (Gram determinant {gram:e})")]
    DegeneratePlane { gram: f64 },

    #[error("point is not cvc({epsilon}): middle sectional curvature {middle} differs by more than {tol:e}")]
    NotCvc { epsilon: f64, middle: f64, tol: f64 },

    #[error("Ricci eigen-decomposition failed")]
    EigenFailure,

    #[error("Ricci eigenvalues collide (gap {gap:e} below {sep_tol:e}); eigenframe field is not smooth here")]
    EigenCollision { gap: f64, sep_tol: f64 },

    #[error("vector is not unit length (|X|^2 = {norm_sq})")]
    NotUnit { norm_sq: f64 },

    #[error("vector is isocurved; the requested construction is undefined there")]
    IsocurvedInput,

    #[error("operation requires a generic point")]
    NotGeneric,

    #[error("velocity is not generic along the trace at t = {t}")]
    NotGenericAlongTrace { t: f64 },

    #[error("energy drift {drift:e} exceeds the allowed {limit:e}; reduce the step")]
    StepTooLarge { drift: f64, limit: f64 },

    #[error("Christoffel data does not satisfy the {system} system (residual {residual:e})")]
    PreconditionResidual { system: &'static str, residual: f64 },

    #[error("Riccati solution blows up at t = {blowup_time}; decay law truncated there")]
    HorizonTruncated {
        blowup_time: f64,
        partial: Box<crate::dynamics::RiccatiSolution>,
    },

    #[error("unknown chart `{0}`")]
    UnknownChart(String),

    #[error("bad chart parameters: {0}")]
    BadParams(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Parse(#[from] crate::expr::ParseError),

    #[error("chart file: {0}")]
    ChartFormat(String),

    #[error("chart metric is not positive definite at {point:?}")]
    NotPositiveDefinite { point: Point },

    #[error("i/o failure: {0}")]
    Io(String),
}

impl Error {
    /// Stable short name used in report rows.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain { .. } => "DomainError",
            Error::SingularMetric { .. } => "SingularMetric",
            Error::DerivativeFailure { .. } => "DerivativeFailure",
            Error::DegeneratePlane { .. } => "DegeneratePlane",
            Error::NotCvc { .. } => "NotCvc",
            Error::EigenFailure => "EigenFailure",
            Error::EigenCollision { .. } => "EigenCollision",
            Error::NotUnit { .. } => "NotUnit",
            Error::IsocurvedInput => "IsocurvedInput",
            Error::NotGeneric => "NotGeneric",
            Error::NotGenericAlongTrace { .. } => "NotGenericAlongTrace",
            Error::StepTooLarge { .. } => "StepTooLarge",
            Error::PreconditionResidual { .. } => "PreconditionResidual",
            Error::HorizonTruncated { .. } => "HorizonTruncated",
            Error::UnknownChart(_) => "UnknownChart",
            Error::BadParams(_) => "BadParams",
            Error::InvalidInput(_) => "InvalidInput",
            Error::Parse(e) => e.kind(),
            Error::ChartFormat(_) => "ChartFormat",
            Error::NotPositiveDefinite { .. } => "NotPositiveDefinite",
            Error::Io(_) => "IOFailure",
        }
    }
}
