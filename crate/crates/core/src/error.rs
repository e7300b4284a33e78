use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("graph construction: {0}")]
    Graph(String),

    #[error("schema mismatch: {0}")]
    Schema(String),

    #[error("size limit exceeded: {total} vertices in total, cap is {cap}")]
    SizeLimit { total: usize, cap: usize },

    #[error("geometry: {0}")]
    Geometry(String),

    #[error("degenerate prototypes: {0}")]
    DegeneratePrototypes(String),

    #[error("insufficient simulations: {available} trajectories, at least {required} required")]
    InsufficientSimulations { available: usize, required: usize },

    #[error("degenerate graph: feature undefined for {vertices} vertices")]
    DegenerateGraph { vertices: usize },

    #[error("invalid config: {0}")]
    InvalidConfig(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
