use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuantumError {
    #[error("invalid register: {0}")]
    InvalidRegister(String),
    #[error("operator of arity {expected} applied to {found} qubits")]
    InvalidArity { expected: usize, found: usize },
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("outcome {outcome} out of range for {qubits} measured qubits")]
    InvalidOutcome { outcome: usize, qubits: usize },
    #[error("unknown qubit `{0}`")]
    UnknownQubit(String),
    #[error("branch has zero probability (trace {0})")]
    ZeroBranch(f64),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("qubit `{0}` would be duplicated")]
    NoCloningViolation(String),
}
