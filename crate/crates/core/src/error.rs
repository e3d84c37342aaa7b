use thiserror::Error;

/// Errors raised by the Hamiltonian builders, solvers and experiment drivers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("index ({row}, {col}) out of range for dimension {dim}")]
    IndexOutOfRange { row: usize, col: usize, dim: usize },

    #[error("operator is not hermitian: element ({row}, {col}) deviates from its conjugate by {deviation:e}")]
    NotHermitian { row: usize, col: usize, deviation: f64 },

    #[error("operation requires a hermitian operator")]
    HermitianRequired,

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { what: &'static str, iterations: usize, residual: f64 },

    #[error("{what}: size {size} exceeds cap {cap}")]
    SizeCap { what: &'static str, size: usize, cap: usize },

    #[error("heralded transfer exceeded {rounds} measurement rounds")]
    HeraldCap { rounds: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("insufficient range: {0}")]
    InsufficientRange(String),

    #[error("parity violation: {0}")]
    Parity(String),

    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    #[error("clock graph branches at configuration {config} (degree {degree})")]
    Branching { config: String, degree: usize },

    #[error("projection lemma inapplicable: gap {gap} <= 2*|H1| = {bound}")]
    LemmaInapplicable { gap: f64, bound: f64 },

    #[error("contraction component spans {size} qubits (cap {cap})")]
    ComponentTooLarge { size: usize, cap: usize },

    #[error("total-spin multiplicity mismatch at N={n}, 2j={two_j}: recursion {recursion}, brute force {brute_force}")]
    MultiplicityMismatch { n: usize, two_j: usize, recursion: usize, brute_force: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
