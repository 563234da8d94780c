use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("endpoint {node} out of range for {n} nodes")]
    EndpointOutOfRange { node: usize, n: usize },
    #[error("graph is not strongly connected")]
    NotStronglyConnected,
    #[error("graph is not regular")]
    Irregular,
    #[error("arc {0} does not exist")]
    UnknownArc(usize),
    #[error("node {0} does not exist")]
    UnknownNode(usize),
    #[error("step {step} outside 1..={t_max}")]
    StepOutOfRange { step: u32, t_max: u32 },
    #[error("empty chunk in transfer")]
    EmptyChunk,
    #[error("mapping is not an isomorphism")]
    NotIsomorphism,
    #[error("search budget of {0} steps exceeded")]
    BudgetExceeded(u64),
    #[error("graph has self-loops")]
    SelfLoops,
    #[error("expected a {expected} schedule")]
    WrongKind { expected: &'static str },
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("no hamiltonian cycle found")]
    NoHamiltonianCycle,
    #[error("graph has no skew-symmetry witness")]
    NotSkewSymmetric,
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("parse error at {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("format error: {0}")]
    Format(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
