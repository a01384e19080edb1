//! Statevector simulation of a named qubit register.

mod gate;
mod state;

pub use gate::matrix;
pub use state::{fidelity_pure, DensityMatrix, QuantumState, ZERO_PROB};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QuantumError {
    #[error("qubit `{0}` is already allocated")]
    DuplicateQubit(String),
    #[error("unknown qubit `{0}`")]
    UnknownQubit(String),
    #[error("gate {gate} expects {expected} targets, got {got}")]
    ArityMismatch {
        gate: String,
        expected: usize,
        got: usize,
    },
    #[error("qubit `{0}` given twice")]
    RepeatedTarget(String),
    #[error("amplitudes are all zero")]
    ZeroVector,
    #[error("measurement outcome has probability zero")]
    ZeroProbabilityBranch,
    #[error("outcome has {got} bits for {expected} qubits")]
    OutcomeWidth { expected: usize, got: usize },
}
