use thiserror::Error;

/// Errors raised by the numerical kernels.
///
/// Variant names are stable: the CLI prints them as the failure tag and the
/// scan exports use them in the `status` column.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter `{0}` is not finite")]
    NonFiniteParameter(String),
    #[error("slow-fast family requires eps > 0, got {0}")]
    NonPositiveEpsilon(f64),
    #[error("polynomial degree {0} exceeds the supported maximum")]
    DegreeTooHigh(usize),
    #[error("invalid system definition: {0}")]
    InvalidSystem(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("step size underflow at t = {t}")]
    StepSizeUnderflow { t: f64 },
    #[error("non-finite state at t = {t}")]
    NonFiniteState { t: f64 },
    #[error("initial point lies outside the escape radius")]
    OutsideEscapeRadius,

    #[error("orbit from y = {y} did not return to the section")]
    NoReturn { y: f64 },
    #[error("section crossing is not transverse (|dx/dt| = {xdot:e})")]
    NonTransverse { xdot: f64 },

    #[error("closed polyline is degenerate")]
    DegeneratePolyline,
    #[error("point lies on the cycle polyline")]
    OnBoundary,

    #[error("outer displacement sign did not stabilise before the escape radius")]
    RangeUndetermined,
    #[error("no fold found: {0}")]
    NoFoldFound(String),
    #[error("Newton iteration diverged after {iterations} iterations")]
    NewtonDiverged { iterations: usize },
    #[error("Jacobian is singular")]
    JacobianSingular,
    #[error("cycle lost at lambda = {lambda} (last good lambda = {last_good})")]
    CycleLost { lambda: f64, last_good: f64 },
    #[error("resultant vanishes identically")]
    DegenerateSystem,

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Short machine-readable tag, used as the status column of exports.
    pub fn tag(&self) -> &'static str {
        match self {
            Error::NonFiniteParameter(_) => "NonFiniteParameter",
            Error::NonPositiveEpsilon(_) => "NonPositiveEpsilon",
            Error::DegreeTooHigh(_) => "DegreeTooHigh",
            Error::InvalidSystem(_) => "InvalidSystem",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::StepSizeUnderflow { .. } => "StepSizeUnderflow",
            Error::NonFiniteState { .. } => "NonFiniteState",
            Error::OutsideEscapeRadius => "OutsideEscapeRadius",
            Error::NoReturn { .. } => "NoReturn",
            Error::NonTransverse { .. } => "NonTransverse",
            Error::DegeneratePolyline => "DegeneratePolyline",
            Error::OnBoundary => "OnBoundary",
            Error::RangeUndetermined => "RangeUndetermined",
            Error::NoFoldFound(_) => "NoFoldFound",
            Error::NewtonDiverged { .. } => "NewtonDiverged",
            Error::JacobianSingular => "JacobianSingular",
            Error::CycleLost { .. } => "CycleLost",
            Error::DegenerateSystem => "DegenerateSystem",
            Error::Io(_) => "Io",
        }
    }

    /// True for errors caused by bad input rather than by the dynamics.
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            Error::NonFiniteParameter(_)
                | Error::NonPositiveEpsilon(_)
                | Error::DegreeTooHigh(_)
                | Error::InvalidSystem(_)
                | Error::InvalidArgument(_)
                | Error::OutsideEscapeRadius
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
