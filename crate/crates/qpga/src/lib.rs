//! Exact simulation of programmable quantum gate arrays.
//!
//! A programmable array is a fixed unitary G acting on a data register and a
//! program register; the program state, not the circuit, decides which
//! operation the data undergoes. This crate implements both regimes exactly
//! with dense state vectors:
//!
//! * the probabilistic teleportation array, where a maximally entangled
//!   program |P_U⟩ drives Bell measurements on data/program pairs and
//!   post-selection on the all-|Φ⁺⟩ branch leaves U|d⟩ with probability
//!   2^(−2m),
//! * the deterministic controlled-select array, which trades one orthogonal
//!   program dimension per implementable operation.
//!
//! The [`verify`] module extracts which unitary an arbitrary (G, |P⟩) pair
//! implements, checks program independence and the orthogonality that
//! deterministic programs must satisfy, and estimates success statistics
//! reproducibly across thread counts.
//!
//! # Conventions
//!
//! * Qubit 0 is the most significant bit of every amplitude index, and
//!   tensor products place the left factor on the high-order bits.
//! * For an array of m data qubits the register order is: data qubits
//!   0..m−1, upper program qubits m..2m−1, lower program qubits 2m..3m−1.
//!   Program pair i is (m+i, 2m+i) and Bell measurements act on (i, m+i).
//! * CNOT control is the first listed target; Bell outcomes are ordered
//!   PhiPlus, PhiMinus, PsiPlus, PsiMinus everywhere.
//! * Tolerances are fixed crate-wide: [`core::TOL_ALG`] for algebraic
//!   identities, [`core::TOL_NORM`] for norms, [`core::TOL_CERT`] for
//!   implementation certificates.

pub mod bell;
pub mod core;
mod error;
pub mod gates;
pub mod io;
pub mod progarray;
pub mod verify;

pub use crate::core::{
    random_haar_unitary, random_state, DensityMatrix, KrausChannel, Operator, StateVector,
    TOL_ALG, TOL_CERT, TOL_NORM,
};
pub use crate::error::{Error, Result};
