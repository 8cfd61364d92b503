use thiserror::Error;

/// Errors raised by state construction, right-hand-side assembly and time stepping.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("singular frame at point {index}: |det a| = {det:e}")]
    SingularFrame { index: usize, det: f64 },

    #[error("principal matrix not positive definite at point {index}: {detail}")]
    SingularPrincipal { index: usize, detail: String },

    #[error("non-positive energy density {mu:e} at point {index}")]
    NonPositiveDensity { index: usize, mu: f64 },

    #[error("spatial metric not positive definite at point {index}")]
    NotPositiveDefinite { index: usize },

    #[error("Kasner exponents {p:?} violate sum p = 1 or sum p^2 = 1")]
    BadExponents { p: [f64; 3] },

    #[error("grid of {n} points per axis too small for a stencil of order {fd_order}")]
    GridTooSmall { n: usize, fd_order: usize },

    #[error("step rejected: {reason}")]
    StepRejected { reason: String },

    #[error("operation requires a fluid state but the state is in vacuum mode")]
    VacuumMode,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
