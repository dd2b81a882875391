use thiserror::Error;

/// Failure classes shared by every module.
///
/// The classes map one-to-one onto the command-line exit codes (see
/// [`Error::exit_code`]), so callers can tell a bad input from a solver
/// that did not converge from data that is mathematically inconsistent.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Problem or solver configuration rejected before any computation.
    #[error("configuration error: {0}")]
    Configuration(String),

    /// A named input invariant does not hold.
    #[error("invariant `{name}` violated: {detail}")]
    InvariantViolated { name: &'static str, detail: String },

    /// A numerical kernel (eigensolver, integrator, root finder) failed.
    #[error("computation error: {0}")]
    Computation(String),

    /// An iterative procedure finished without meeting its tolerance.
    #[error("convergence error: {0}")]
    Convergence(String),

    /// Data cannot come from the configuration it claims to describe.
    #[error("inconsistency: {0}")]
    Inconsistency(String),

    /// A post-processing diagnostic could not be formed.
    #[error("diagnostics error: {0}")]
    Diagnostics(String),

    /// The operation reached a point where the equation degenerates.
    #[error("degenerate: {0}")]
    Degenerate(String),
}

impl Error {
    /// 0 ok, 2 configuration, 3 convergence, 4 mathematical inconsistency.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_) | Error::Configuration(_) | Error::InvariantViolated { .. } => 2,
            Error::Computation(_)
            | Error::Convergence(_)
            | Error::Diagnostics(_)
            | Error::Degenerate(_) => 3,
            Error::Inconsistency(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
