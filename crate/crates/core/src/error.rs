use thiserror::Error;

/// Errors raised across simulation, estimation and interval construction.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Invalid argument or configuration value.
    #[error("usage error: {0}")]
    Usage(String),

    #[error("unknown model `{0}` (expected example1 or example2)")]
    UnknownModel(String),

    /// The Euler recursion produced a non-finite or exploding state.
    #[error("simulation blew up at step {step} (state {state})")]
    SimulationBlowup { step: usize, state: f64 },

    /// No observation falls inside the kernel window around `x`.
    #[error("no observations near x = {x}")]
    NoLocalData { x: f64 },

    /// The local-linear design is (near) collinear. Carries the local-constant value.
    #[error("degenerate local-linear design at x = {x} (local-constant fallback {nw_fallback})")]
    DegenerateDesign { x: f64, nw_fallback: f64 },

    /// Every candidate bandwidth left all held-out fits infeasible.
    #[error("no feasible cross-validation fit at bandwidth {h}")]
    BandwidthInfeasible { h: f64 },

    /// All estimating values share one sign: theta lies outside the response hull.
    #[error("theta outside the convex hull of the local responses")]
    HullViolation,

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Usage(format!("invalid JSON: {e}"))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
