use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate geometry: agents {0} and {1} share a position")]
    CoincidentAgents(u32, u32),

    #[error("no feasible candidate (the stay-in-place candidate is always feasible)")]
    EmptyFeasibleSet,

    #[error("could not place {requested} agents: only {achieved} fit after {attempts} attempts")]
    SpawnInfeasible {
        requested: usize,
        achieved: usize,
        attempts: u64,
    },

    #[error("metric error: {0}")]
    Metric(String),

    #[error("observer failed at tick {tick}: {message}")]
    Observer { tick: u64, message: String },

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
