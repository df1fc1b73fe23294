use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid chain length {0}: must be positive, even and at most 63")]
    ChainLength(usize),
    #[error("basis index {index} out of range for L = {len}")]
    IndexRange { index: u64, len: usize },
    #[error("invalid gate: {0}")]
    Gate(String),
    #[error("gate has no finite order up to {0}")]
    NoFiniteOrder(usize),
    #[error("invalid circuit: {0}")]
    Circuit(String),
    #[error("orbit of {seed} does not close within {l_max} steps")]
    OrbitTooLong { seed: String, l_max: usize },
    #[error("subset is not closed: state {0} leaves it")]
    NotClosed(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("{0} exceeds the guard of {1}")]
    Guard(String, usize),
    #[error("symmetry does not commute with the Hamiltonian (deviation {0:e})")]
    Symmetry(f64),
    #[error("norm drift {0:e} exceeds tolerance")]
    NormDrift(f64),
    #[error("unknown model '{0}'")]
    UnknownModel(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("eigendecomposition failed")]
    Eigen,
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
