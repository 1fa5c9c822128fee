use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix order must be at least 1")]
    EmptyMatrix,
    #[error("expected {expected} entries, found {found}")]
    BadLength { expected: usize, found: usize },
    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("Jacobi eigensolver did not converge in {sweeps} sweeps")]
    EigenNoConvergence { sweeps: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GuessError {
    #[error("occupancy {n_occ} must lie strictly between 0 and {order}")]
    InvalidOccupancy { n_occ: usize, order: usize },
    #[error("chemical potential {mu} is not strictly inside the spectral bounds [{lower}, {upper}]")]
    InvalidChemicalPotential { mu: f64, lower: f64, upper: f64 },
    #[error("invalid guess configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Raised by single purification steps.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum StepError {
    /// `Tr[D (I - D)]` is below the degeneracy floor, so `c` is undefined.
    /// The caller treats the state as converged.
    #[error("Tr[D(I-D)] = {idempotency_error:e} is below the degeneracy floor")]
    Degenerate { idempotency_error: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecError {
    #[error("invalid Hamiltonian spec: {0}")]
    Invalid(String),
}

#[derive(Debug, Error)]
pub enum MtxError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error("trace {0} is negative: not a physical density matrix")]
    NegativeTrace(f64),
    #[error("frontier eigenvalues are degenerate (gap {gap:e}): ground-state projector is ill-defined")]
    DegenerateFrontier { gap: f64 },
    #[error("occupancy {n_occ} out of range for order {order}")]
    InvalidOccupancy { n_occ: usize, order: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BenchError {
    #[error("linear fit needs at least 2 converged cells, got {0}")]
    TooFewPoints(usize),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error(transparent)]
    Purify(#[from] PurifyError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PurifyError {
    #[error("invalid purifier configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Guess(#[from] GuessError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}
