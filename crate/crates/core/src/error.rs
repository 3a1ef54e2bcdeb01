use alloc::string::String;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("stencil leaves the domain box at tau={tau}, axis {axis}")]
    StencilOutOfDomain { tau: f64, axis: usize },

    #[error("singular point: {0}")]
    Singular(String),

    #[error("singular Jacobian after {iterations} Newton iterations")]
    SingularJacobian { iterations: usize },

    #[error("Newton iteration did not converge in {iterations} steps (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("field is not analytic at the probes (worst residual {worst:e})")]
    NotAnalytic { worst: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("logarithm branch ambiguity in spinor component {component}")]
    Branch { component: usize },
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
