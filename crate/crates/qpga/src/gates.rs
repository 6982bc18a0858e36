//! Named gates and the composite circuits the array is built from.
//!
//! CNOT convention used throughout the crate: the control is the first
//! listed target qubit and the target flips when the control reads 1.

use std::str::FromStr;

use nalgebra::DMatrix;

use crate::core::{c, Operator, TOL_ALG};
use crate::error::{Error, Result};

/// The fixed gate vocabulary: Pauli corrections, Hadamard, controlled-NOT,
/// and the identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateName {
    I,
    X,
    Y,
    Z,
    H,
    Cnot,
}

impl GateName {
    pub fn label(&self) -> &'static str {
        match self {
            GateName::I => "i",
            GateName::X => "x",
            GateName::Y => "y",
            GateName::Z => "z",
            GateName::H => "h",
            GateName::Cnot => "cnot",
        }
    }
}

impl FromStr for GateName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "i" => Ok(GateName::I),
            "x" => Ok(GateName::X),
            "y" => Ok(GateName::Y),
            "z" => Ok(GateName::Z),
            "h" => Ok(GateName::H),
            "cnot" => Ok(GateName::Cnot),
            other => Err(Error::Parse(format!("unknown gate name {other:?}"))),
        }
    }
}

/// The standard matrix for a named gate: 2×2 for the single-qubit names,
/// 4×4 for CNOT. σy is [[0, −i], [i, 0]].
pub fn gate(name: GateName) -> Operator {
    let zero = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    match name {
        GateName::I => Operator::identity(1),
        GateName::X => Operator::from_rows(1, &[zero, one, one, zero]).unwrap(),
        GateName::Y => {
            Operator::from_rows(1, &[zero, c(0.0, -1.0), c(0.0, 1.0), zero]).unwrap()
        }
        GateName::Z => Operator::from_rows(1, &[one, zero, zero, c(-1.0, 0.0)]).unwrap(),
        GateName::H => {
            let inv = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            Operator::from_rows(1, &[inv, inv, inv, -inv]).unwrap()
        }
        GateName::Cnot => Operator::from_rows(
            2,
            &[
                one, zero, zero, zero,
                zero, one, zero, zero,
                zero, zero, zero, one,
                zero, zero, one, zero,
            ],
        )
        .unwrap(),
    }
}

/// The swap of qubits `q1` and `q2` written as three cascaded CNOTs,
/// expanded to an `n`-qubit operator:
/// CNOT(q1→q2) · CNOT(q2→q1) · CNOT(q1→q2).
pub fn swap_via_cnots(q1: usize, q2: usize, n: usize) -> Result<Operator> {
    if q1 >= n {
        return Err(Error::QubitOutOfRange {
            index: q1,
            num_qubits: n,
        });
    }
    if q2 >= n {
        return Err(Error::QubitOutOfRange {
            index: q2,
            num_qubits: n,
        });
    }
    if q1 == q2 {
        return Err(Error::DuplicateTarget { index: q1 });
    }
    let cnot = gate(GateName::Cnot);
    let forward = cnot.expand(n, &[q1, q2])?;
    let backward = cnot.expand(n, &[q2, q1])?;
    forward.compose(&backward)?.compose(&forward)
}

/// The controlled-select operator of the deterministic array:
///
///   G = Σ_{i<N} Uᵢ ⊗ |i⟩⟨i|  +  Σ_{i≥N} I ⊗ |i⟩⟨i|
///
/// on m + `program_qubits` qubits, with the data register on the high-order
/// bits. Program basis states beyond the supplied list act as the identity,
/// which keeps G unitary when N is not a power of two.
pub fn controlled_select(unitaries: &[Operator], program_qubits: usize) -> Result<Operator> {
    let first = unitaries
        .first()
        .ok_or(Error::EmptyList { what: "unitary" })?;
    let m = first.num_qubits();
    let data_dim = first.dim();
    if program_qubits == 0 {
        return Err(Error::QubitOutOfRange {
            index: 0,
            num_qubits: 0,
        });
    }
    let prog_dim = 1usize << program_qubits;
    if unitaries.len() > prog_dim {
        return Err(Error::CapacityExceeded {
            count: unitaries.len(),
            program_qubits,
        });
    }
    for u in unitaries {
        if u.dim() != data_dim {
            return Err(Error::DimensionMismatch {
                expected: data_dim,
                actual: u.dim(),
            });
        }
        u.require_unitary(TOL_ALG)?;
    }
    let dim = data_dim * prog_dim;
    let mut mat = DMatrix::from_element(dim, dim, c(0.0, 0.0));
    let identity = Operator::identity(m);
    for i in 0..prog_dim {
        let block = unitaries.get(i).unwrap_or(&identity).matrix();
        // Data on high bits: global index is (data index)·prog_dim + i.
        for r in 0..data_dim {
            for col in 0..data_dim {
                mat[(r * prog_dim + i, col * prog_dim + i)] = block[(r, col)];
            }
        }
    }
    Operator::new(m + program_qubits, mat)
}
