use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested physics is outside what the solver supports.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A precondition on the inputs does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The density cap is too small to hold the requested mass.
    #[error(
        "infeasible cap: cap {cap:.6e} holds at most mass {max_mass:.6e} in the admissible ball, target {target:.6e}"
    )]
    InfeasibleCap { cap: f64, max_mass: f64, target: f64 },

    /// A body does not fit into its admissible ball.
    #[error("infeasible geometry: {reason} (minimum feasible J = {min_j:.6e}, maximum feasible m = {max_m:.6e})")]
    InfeasibleGeometry { reason: String, min_j: f64, max_m: f64 },

    /// Malformed configuration input.
    #[error("config error: {0}")]
    Config(String),

    /// Malformed binary or text payload.
    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
