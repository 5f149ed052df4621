use thiserror::Error;

/// Errors returned by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid allocation: {0}")]
    InvalidAllocation(String),

    #[error("agent index {agent} out of range for {n_agents} agents")]
    AgentOutOfRange { agent: usize, n_agents: usize },

    #[error("invalid epsilon: {0}")]
    InvalidEps(String),

    #[error("search space of {size} allocations exceeds the enumeration cap of {cap}")]
    CapExceeded { size: u128, cap: u64 },

    #[error("algorithm requires strictly positive valuations")]
    NotPositive,

    #[error("algorithm requires binary valuations")]
    NotBinary,

    #[error("step limit of {max_steps} exceeded")]
    StepLimit {
        max_steps: u64,
        trace: crate::market::SolveTrace,
    },

    #[error("invariant breach: {0}")]
    InvariantBreach(String),

    #[error(transparent)]
    Parse(#[from] crate::instio::ParseError),

    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
