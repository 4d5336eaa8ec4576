use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("alphabet size mismatch: {left} vs {right}")]
    AlphabetMismatch { left: usize, right: usize },

    #[error("value {value} outside alphabet 1..={q}")]
    ValueOutOfRange { value: usize, q: usize },

    #[error("not a permutation of 1..={0}")]
    NotAPermutation(usize),

    #[error("probability {0} outside [0, 1]")]
    ProbabilityOutOfRange(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("n_vars * d_v = {sockets} is not divisible by d_c = {dc}")]
    SocketDivisibility { sockets: usize, dc: usize },

    #[error("no simple interleaver found after {0} attempts")]
    ResampleLimit(usize),

    #[error("no codeword found within {restarts} restarts of {budget} expansions each")]
    NoCodewordFound { restarts: usize, budget: u64 },

    #[error("exhaustive search proved the graph has no codeword")]
    GraphInfeasible,

    #[error("contradictory beliefs: all-zero product")]
    Contradiction,

    #[error("infeasible constraint: permanent is zero")]
    InfeasibleConstraint,

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("malformed grid: {0}")]
    MalformedGrid(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
