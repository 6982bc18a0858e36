//! Crate-wide error type.

use thiserror::Error;

use crate::bell::BellOutcome;

/// Errors produced by state, operator, and array operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("qubit index {index} out of range for a {num_qubits}-qubit register")]
    QubitOutOfRange { index: usize, num_qubits: usize },

    #[error("duplicate target qubit {index}")]
    DuplicateTarget { index: usize },

    #[error("empty {what} list")]
    EmptyList { what: &'static str },

    #[error("operator is not unitary (deviation {deviation:.3e} from U\u{2020}U = I)")]
    NotUnitary { deviation: f64 },

    #[error("state vector is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("non-finite entry encountered")]
    NonFinite,

    #[error("all-zero input has no global-phase comparison")]
    ZeroInput,

    #[error("invalid density matrix: {reason}")]
    InvalidDensity { reason: String },

    #[error("Kraus operators violate completeness (deviation {deviation:.3e} from \u{3a3} K\u{2020}K = I)")]
    IncompleteChannel { deviation: f64 },

    #[error("parameter {name} = {value} outside [0, 1]")]
    ParameterOutOfRange { name: &'static str, value: f64 },

    #[error("projection onto {outcome} has zero probability")]
    ZeroProbabilityBranch { outcome: BellOutcome },

    #[error("random value {value} outside [0, 1)")]
    RandomOutOfRange { value: f64 },

    #[error("{count} operators exceed the capacity of {program_qubits} program qubits")]
    CapacityExceeded { count: usize, program_qubits: usize },

    #[error("program does not implement a unitary under this array (deviation {deviation:.3e})")]
    NotImplementedByArray { deviation: f64 },

    /// JSON-level failure: the input could not be read as an interchange object.
    #[error("parse error: {0}")]
    Parse(String),

    /// Structure-level failure: valid JSON with the wrong shape or kind.
    #[error("malformed quantum object: {0}")]
    Format(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
