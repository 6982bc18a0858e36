//! The programmable gate array itself: program encoding, the probabilistic
//! teleportation array with post-selection, failure-branch bookkeeping, the
//! deterministic controlled-select array, and the mixed-program channel mode.
//!
//! # Register layout
//!
//! For m data qubits the full register holds 3m qubits:
//! data = qubits 0..m−1, upper program = m..2m−1, lower program = 2m..3m−1.
//! Program pair i is the qubit pair (m+i, 2m+i); the array measures data
//! qubit i jointly with upper program qubit i, in order i = 0, 1, …, m−1,
//! consuming one uniform value per pair.
//!
//! # Phase bookkeeping
//!
//! A branch with outcomes (t₀, …, t₍ₘ₋₁₎) leaves the lower program register
//! in phase · U · (⊗ᵢ σᵢ)|d⟩ with σ per the map Φ⁺→I, Φ⁻→Z, Ψ⁺→X, Ψ⁻→Y and
//! phase = i^(count of Ψ⁻). The phase is only meaningful relative to a fixed
//! convention for reading the residual off the post-measurement state: each
//! measured Bell factor is taken on its qubit pair ordered (upper program,
//! data). Only the antisymmetric Ψ⁻ can tell the orderings apart, and this
//! one realizes the i·Uσy|d⟩ branch of the four-outcome table exactly.

use num_complex::Complex64;

use crate::bell::{bell_state, branch_bell, measure_bell, BellOutcome};
use crate::core::{c, DensityMatrix, KrausChannel, Operator, StateVector, TOL_ALG, TOL_NORM};
use crate::error::{Error, Result};
use crate::gates::{controlled_select, gate, GateName};

/// A 2m-qubit program state: upper program qubits first, then the lower m
/// qubits that end up carrying the transformed data.
#[derive(Debug, Clone, PartialEq)]
pub struct ProgramState {
    data_qubits: usize,
    state: StateVector,
}

impl ProgramState {
    /// Wraps a normalized state on an even number of qubits.
    pub fn new(state: StateVector) -> Result<Self> {
        let n = state.num_qubits();
        if n % 2 != 0 {
            return Err(Error::DimensionMismatch {
                expected: n + 1,
                actual: n,
            });
        }
        Ok(Self {
            data_qubits: n / 2,
            state,
        })
    }

    /// Number of data qubits m the program drives.
    pub fn num_data_qubits(&self) -> usize {
        self.data_qubits
    }

    /// Total program register size, 2m.
    pub fn num_qubits(&self) -> usize {
        2 * self.data_qubits
    }

    pub fn state(&self) -> &StateVector {
        &self.state
    }

    pub fn into_state(self) -> StateVector {
        self.state
    }
}

/// ⊗ᵢ |Φ⁺⟩ across the pairs (i, m+i) of a 2m-qubit register: amplitude
/// 2^(−m/2) exactly at the indices x·2^m + x.
pub(crate) fn phi_plus_pairs(m: usize) -> StateVector {
    assert!(m >= 1, "program needs at least one pair");
    let half = 1usize << m;
    // sqrt of the exact dyadic 2^-m is correctly rounded, so this agrees
    // bit-for-bit with FRAC_1_SQRT_2-based Bell amplitudes at m = 1.
    let amp = c((half as f64).recip().sqrt(), 0.0);
    let mut amps = vec![c(0.0, 0.0); half * half];
    for x in 0..half {
        amps[x * half + x] = amp;
    }
    StateVector::new(2 * m, amps).expect("pair backbone is normalized by construction")
}

/// Encodes the program |P_U⟩ = (I ⊗ U) ⊗ᵢ |Φ⁺⟩: Bell pairs across
/// (i, m+i), then U applied to the lower m qubits.
pub fn encode_program(u: &Operator) -> Result<ProgramState> {
    u.require_unitary(TOL_ALG)?;
    let m = u.num_qubits();
    let lower: Vec<usize> = (m..2 * m).collect();
    let state = u.apply(&phi_plus_pairs(m), &lower)?;
    ProgramState::new(state)
}

/// Joins data and program into the 3m-qubit array input |d⟩ ⊗ |P⟩, data on
/// qubits 0..m−1. The two registers start unentangled by construction.
pub fn assemble_input(d: &StateVector, p: &ProgramState) -> Result<StateVector> {
    if d.num_qubits() != p.num_data_qubits() {
        return Err(Error::DimensionMismatch {
            expected: p.num_data_qubits(),
            actual: d.num_qubits(),
        });
    }
    Ok(d.tensor(p.state()))
}

/// How a successful run moves U|d⟩ from the lower program register back into
/// the data register.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwapBack {
    /// Three CNOTs per qubit pair, the explicit circuit. Default.
    CnotCircuit,
    /// Re-defines the output register instead of moving amplitudes; a
    /// documented fast path that produces the identical final_data.
    Relabel,
}

/// One stochastic pass of the array.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    /// Bell outcomes for pairs i = 0..m−1 in measurement order.
    pub outcomes: Vec<BellOutcome>,
    /// True iff every outcome is Φ⁺.
    pub success: bool,
    /// Joint probability of this outcome tuple; 2^(−2m) for every tuple.
    pub branch_probability: f64,
    /// U|d⟩ on success; the uncorrected lower-register residual on failure.
    pub final_data: StateVector,
}

/// Contracts the measured Bell factors out of a post-measurement state,
/// leaving the lower-register residual. Pair i is contracted in the
/// (upper program, data) order fixed by the module-level phase convention.
fn extract_residual(
    state: &StateVector,
    m: usize,
    outcomes: &[BellOutcome],
) -> Result<StateVector> {
    let mut known = bell_state(outcomes[0]);
    for &t in &outcomes[1..] {
        known = known.tensor(&bell_state(t));
    }
    let mut qubits = Vec::with_capacity(2 * m);
    for (i, _) in outcomes.iter().enumerate() {
        qubits.push(m + i);
        qubits.push(i);
    }
    state.factor_out(&known, &qubits)
}

/// Deterministically selects one full outcome tuple: encodes the program,
/// projects pair i onto outcomes[i] for each i, and returns the joint branch
/// probability together with the uncorrected lower-register residual.
pub(crate) fn branch_run(
    u: &Operator,
    d: &StateVector,
    outcomes: &[BellOutcome],
) -> Result<(f64, StateVector)> {
    let m = u.num_qubits();
    if outcomes.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: outcomes.len(),
        });
    }
    let p = encode_program(u)?;
    let mut state = assemble_input(d, &p)?;
    let mut probability = 1.0f64;
    for (i, &kind) in outcomes.iter().enumerate() {
        let (pi, post) = branch_bell(&state, i, m + i, kind)?;
        probability *= pi;
        state = post;
    }
    let residual = extract_residual(&state, m, outcomes)?;
    Ok((probability, residual))
}

/// Runs the array once with the default explicit swap-back circuit.
pub fn run_once(u: &Operator, d: &StateVector, rand_stream: &[f64]) -> Result<RunRecord> {
    run_once_with(u, d, rand_stream, SwapBack::CnotCircuit)
}

/// Runs the array once: encode, assemble, Bell-measure the m pairs in order
/// (one uniform value each), then on the all-Φ⁺ branch swap U|d⟩ back into
/// the data register. Failure reports the uncorrected residual the lower
/// register was left holding.
pub fn run_once_with(
    u: &Operator,
    d: &StateVector,
    rand_stream: &[f64],
    swap_back: SwapBack,
) -> Result<RunRecord> {
    let m = u.num_qubits();
    if d.num_qubits() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: d.num_qubits(),
        });
    }
    if rand_stream.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: rand_stream.len(),
        });
    }
    let d_norm = d.norm();
    if (d_norm - 1.0).abs() > TOL_NORM {
        return Err(Error::NotNormalized { norm: d_norm });
    }
    let p = encode_program(u)?;
    let mut state = assemble_input(d, &p)?;
    let mut outcomes = Vec::with_capacity(m);
    let mut branch_probability = 1.0f64;
    for i in 0..m {
        let rec = measure_bell(&state, i, m + i, rand_stream[i])?;
        branch_probability *= rec.probability;
        outcomes.push(rec.outcome);
        state = rec.post_state;
    }
    let success = outcomes.iter().all(|&o| o == BellOutcome::PhiPlus);
    let final_data = if success {
        match swap_back {
            SwapBack::Relabel => extract_residual(&state, m, &outcomes)?,
            SwapBack::CnotCircuit => {
                let cnot = gate(GateName::Cnot);
                for i in 0..m {
                    state = cnot.apply(&state, &[i, 2 * m + i])?;
                    state = cnot.apply(&state, &[2 * m + i, i])?;
                    state = cnot.apply(&state, &[i, 2 * m + i])?;
                }
                // The swaps leave U|d⟩ on qubits 0..m−1 and a Φ⁺ pair on
                // each (m+i, 2m+i); peeling those pairs off exposes the data
                // register.
                let spent: Vec<usize> = (m..3 * m).collect();
                state.factor_out(&phi_plus_pairs(m), &spent)?
            }
        }
    } else {
        extract_residual(&state, m, &outcomes)?
    };
    Ok(RunRecord {
        outcomes,
        success,
        branch_probability,
        final_data,
    })
}

/// Post-selects the all-Φ⁺ branch: returns its exact probability, 2^(−2m),
/// and the output state U|d⟩.
pub fn postselect(u: &Operator, d: &StateVector) -> Result<(f64, StateVector)> {
    let all_plus = vec![BellOutcome::PhiPlus; u.num_qubits()];
    branch_run(u, d, &all_plus).map_err(|e| match e {
        // Every tuple of a unitary program carries probability 2^(−2m) > 0,
        // so a zero branch here is a broken internal invariant, not an input
        // condition.
        Error::ZeroProbabilityBranch { .. } => {
            unreachable!("all-Φ⁺ branch of a unitary program has probability 2^(−2m)")
        }
        other => other,
    })
}

/// The Pauli correction characterizing a failure branch: the residual equals
/// phase · U · (⊗ᵢ σᵢ)|d⟩.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliCorrection {
    /// i^(count of Ψ⁻); always one of {1, i, −1, −i}.
    pub phase: Complex64,
    /// One Pauli (or I) per qubit pair, in measurement order.
    pub per_qubit: Vec<GateName>,
}

impl PauliCorrection {
    /// The full m-qubit operator phase · σ₀ ⊗ σ₁ ⊗ … ⊗ σ₍ₘ₋₁₎.
    pub fn operator(&self) -> Operator {
        let mut op = gate(self.per_qubit[0]);
        for &name in &self.per_qubit[1..] {
            op = op.tensor(&gate(name));
        }
        op.scale(self.phase)
    }
}

/// Maps an outcome tuple to its Pauli correction: Φ⁺→I, Φ⁻→Z, Ψ⁺→X, Ψ⁻→Y,
/// with phase i per Ψ⁻ factor.
pub fn residual_correction(outcomes: &[BellOutcome]) -> Result<PauliCorrection> {
    if outcomes.is_empty() {
        return Err(Error::EmptyList { what: "outcome" });
    }
    let mut phase = c(1.0, 0.0);
    let per_qubit = outcomes
        .iter()
        .map(|o| match o {
            BellOutcome::PhiPlus => GateName::I,
            BellOutcome::PhiMinus => GateName::Z,
            BellOutcome::PsiPlus => GateName::X,
            BellOutcome::PsiMinus => {
                phase *= c(0.0, 1.0);
                GateName::Y
            }
        })
        .collect();
    Ok(PauliCorrection { phase, per_qubit })
}

/// Builds the deterministic array for N unitaries: the fixed gate is a
/// controlled-select over ⌈log₂N⌉ program qubits (at least one, so the
/// program register exists even for N = 1) and program i is the basis state
/// |i⟩. Each U_i is implemented with certainty and the residual program is
/// |i⟩ unchanged.
pub fn deterministic_array(unitaries: &[Operator]) -> Result<(Operator, Vec<StateVector>)> {
    let n = unitaries.len();
    let program_qubits = if n <= 1 {
        1
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    };
    let g = controlled_select(unitaries, program_qubits)?;
    let programs = (0..n)
        .map(|i| StateVector::basis(program_qubits, i))
        .collect();
    Ok((g, programs))
}

/// Encodes a channel as a mixed program: the channel applied to the lower
/// half of the Φ⁺ pair backbone. For a unitary channel {U} this is exactly
/// |P_U⟩⟨P_U|.
pub fn encode_program_channel(ch: &KrausChannel) -> Result<DensityMatrix> {
    let m = ch.num_qubits();
    let backbone = phi_plus_pairs(m).density();
    let lower: Vec<usize> = (m..2 * m).collect();
    ch.apply(&backbone, &lower)
}

/// Channel-mode post-selection: assembles ρ_d ⊗ ρ_P, projects every pair
/// (i, m+i) onto Φ⁺, renormalizes, and discards the measured qubits so the
/// lower register becomes the output (the swap-back reduces to relabeling
/// once the other 2m qubits are traced out). For a trace-preserving channel
/// the probability is 2^(−2m) and the output is the channel applied to ρ_d.
pub fn run_channel_postselect(
    ch: &KrausChannel,
    rho_d: &DensityMatrix,
) -> Result<(f64, DensityMatrix)> {
    let m = ch.num_qubits();
    if rho_d.num_qubits() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: rho_d.num_qubits(),
        });
    }
    let program = encode_program_channel(ch)?;
    let joint = rho_d.tensor(&program);
    let phi = crate::bell::projector(BellOutcome::PhiPlus);
    let mut proj = phi.expand(3 * m, &[0, m])?;
    for i in 1..m {
        proj = proj.compose(&phi.expand(3 * m, &[i, m + i])?)?;
    }
    let projected = joint.conjugate_raw(proj.matrix());
    let probability = projected.diagonal().sum().re;
    if probability <= crate::bell::ZERO_BRANCH_TOL {
        return Err(Error::ZeroProbabilityBranch {
            outcome: BellOutcome::PhiPlus,
        });
    }
    let renormalized = projected / c(probability, 0.0);
    let full = DensityMatrix::from_matrix_unchecked(3 * m, renormalized);
    let keep: Vec<usize> = (2 * m..3 * m).collect();
    let output = full.partial_trace(&keep)?;
    Ok((probability, output))
}
