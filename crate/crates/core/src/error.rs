use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument fell outside the domain of a model formula.
    #[error("domain error in {what}: {detail}")]
    Domain { what: &'static str, detail: String },

    /// Adaptive quadrature ran out of subdivisions before meeting its tolerance.
    #[error("quadrature did not converge: estimate {estimate:e}, error bound {error:e}")]
    NoConvergence { estimate: f64, error: f64 },

    #[error("root is not bracketed: g({lo}) = {g_lo:e}, g({hi}) = {g_hi:e}")]
    Bracket { lo: f64, hi: f64, g_lo: f64, g_hi: f64 },

    /// The fading threshold drives the service rate below the arrival rate.
    #[error("infeasible threshold: service rate {service:.6} pkts/s is below arrival rate {arrival:.6} pkts/s")]
    InfeasibleThreshold { service: f64, arrival: f64 },

    #[error("queue overloaded: offered load {rho:.6} >= 1")]
    Overload { rho: f64 },

    /// λ·T_slt >= 1, so no threshold keeps the queue stable.
    #[error("infeasible load: lambda * t_slot = {load:.6} >= 1")]
    InfeasibleLoad { load: f64 },

    #[error("aggregate interference is identically zero")]
    DegenerateInterference,

    #[error("degenerate geometry: transmitter and receiver coincide")]
    DegenerateGeometry,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            what,
            detail: detail.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
