use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Density or pressure is non-positive at a grid node.
    #[error("non-physical state at node {node}: {quantity} = {value}")]
    NonPhysicalState {
        node: usize,
        quantity: &'static str,
        value: f64,
    },

    #[error("time step {dt} exceeds the CFL bound {bound}")]
    CflViolation { dt: f64, bound: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid alignment path: {0}")]
    InvalidPath(String),

    #[error("states are at different times ({0} vs {1})")]
    TimeMismatch(f64, f64),

    #[error("all likelihoods are zero")]
    AllZeroLikelihood,

    #[error("vacuum is generated by the Riemann data")]
    VacuumFormation,

    #[error("transport solver did not converge after {0} pivots")]
    TransportNotConverged(usize),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerics (as opposed to bad input or configuration).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonPhysicalState { .. }
                | Error::CflViolation { .. }
                | Error::AllZeroLikelihood
                | Error::VacuumFormation
                | Error::TransportNotConverged(_)
        )
    }
}
