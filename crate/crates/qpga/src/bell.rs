//! Bell basis states, projectors, and two-qubit Bell measurements.
//!
//! Measurements come in two flavors: [`measure_bell`] consumes one uniform
//! random value and samples an outcome, while [`branch_bell`] deterministically
//! post-selects a chosen branch. Both renormalize by the real square root of
//! the branch probability, so relative phases survive untouched.

use std::fmt;
use std::str::FromStr;

use crate::core::{c, Operator, StateVector};
use crate::error::{Error, Result};

/// Probabilities at or below this are treated as an impossible branch rather
/// than numerical noise to renormalize away.
pub const ZERO_BRANCH_TOL: f64 = 1e-12;

/// The four Bell measurement outcomes, in the canonical order used for both
/// sampling and serialization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BellOutcome {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

/// Canonical outcome order: cumulative sampling walks this array.
pub const BELL_OUTCOMES: [BellOutcome; 4] = [
    BellOutcome::PhiPlus,
    BellOutcome::PhiMinus,
    BellOutcome::PsiPlus,
    BellOutcome::PsiMinus,
];

impl BellOutcome {
    /// Serialized form: "phi+", "phi-", "psi+", "psi-".
    pub fn label(&self) -> &'static str {
        match self {
            BellOutcome::PhiPlus => "phi+",
            BellOutcome::PhiMinus => "phi-",
            BellOutcome::PsiPlus => "psi+",
            BellOutcome::PsiMinus => "psi-",
        }
    }

    /// Position in the canonical order.
    pub fn index(&self) -> usize {
        match self {
            BellOutcome::PhiPlus => 0,
            BellOutcome::PhiMinus => 1,
            BellOutcome::PsiPlus => 2,
            BellOutcome::PsiMinus => 3,
        }
    }
}

impl fmt::Display for BellOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for BellOutcome {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "phi+" => Ok(BellOutcome::PhiPlus),
            "phi-" => Ok(BellOutcome::PhiMinus),
            "psi+" => Ok(BellOutcome::PsiPlus),
            "psi-" => Ok(BellOutcome::PsiMinus),
            other => Err(Error::Parse(format!("unknown Bell outcome {other:?}"))),
        }
    }
}

/// Result of a sampled Bell measurement on one qubit pair.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord {
    pub outcome: BellOutcome,
    /// Branch probability of the selected outcome (the squared norm of the
    /// projected state before renormalization).
    pub probability: f64,
    /// Renormalized post-measurement state of the full register.
    pub post_state: StateVector,
}

/// The normalized two-qubit Bell state for an outcome:
/// |Φ±⟩ = (|00⟩ ± |11⟩)/√2 and |Ψ±⟩ = (|01⟩ ± |10⟩)/√2.
pub fn bell_state(kind: BellOutcome) -> StateVector {
    let inv = std::f64::consts::FRAC_1_SQRT_2;
    let zero = c(0.0, 0.0);
    let p = c(inv, 0.0);
    let n = c(-inv, 0.0);
    let amps = match kind {
        BellOutcome::PhiPlus => vec![p, zero, zero, p],
        BellOutcome::PhiMinus => vec![p, zero, zero, n],
        BellOutcome::PsiPlus => vec![zero, p, p, zero],
        BellOutcome::PsiMinus => vec![zero, p, n, zero],
    };
    StateVector::new(2, amps).expect("Bell states are normalized by construction")
}

/// The rank-one projector |B⟩⟨B| onto a Bell state, as a 2-qubit operator.
pub fn projector(kind: BellOutcome) -> Operator {
    let b = bell_state(kind);
    Operator::new(2, b.vector() * b.vector().adjoint())
        .expect("projector construction cannot fail")
}

/// Branch probabilities for measuring qubits (qa, qb) in the Bell basis,
/// listed in canonical outcome order.
pub fn branch_probabilities(
    state: &StateVector,
    qa: usize,
    qb: usize,
) -> Result<[f64; 4]> {
    let mut probs = [0.0f64; 4];
    for (slot, kind) in BELL_OUTCOMES.into_iter().enumerate() {
        let projected = projector(kind).apply(state, &[qa, qb])?;
        probs[slot] = projected.vector().norm_squared();
    }
    Ok(probs)
}

/// Samples a Bell measurement of qubits (qa, qb) using a single uniform
/// value in [0,1): the outcome is the first one whose cumulative probability
/// (in canonical order) exceeds `rand`.
pub fn measure_bell(
    state: &StateVector,
    qa: usize,
    qb: usize,
    rand: f64,
) -> Result<MeasurementRecord> {
    if !(0.0..1.0).contains(&rand) {
        return Err(Error::RandomOutOfRange { value: rand });
    }
    let probs = branch_probabilities(state, qa, qb)?;
    let mut cumulative = 0.0f64;
    let mut selected = None;
    let mut last_nonzero = None;
    for (slot, kind) in BELL_OUTCOMES.into_iter().enumerate() {
        if probs[slot] > ZERO_BRANCH_TOL {
            last_nonzero = Some(kind);
        }
        cumulative += probs[slot];
        if rand < cumulative {
            selected = Some(kind);
            break;
        }
    }
    // The probabilities sum to 1 only within floating error; a draw landing
    // in that sliver falls through to the last possible outcome.
    let outcome = selected
        .or(last_nonzero)
        .expect("a normalized state has at least one nonzero branch");
    let (probability, post_state) = branch_bell(state, qa, qb, outcome)?;
    Ok(MeasurementRecord {
        outcome,
        probability,
        post_state,
    })
}

/// Deterministically projects qubits (qa, qb) onto the chosen Bell state,
/// returning the exact branch probability and the renormalized post-state.
///
/// A branch with probability at or below [`ZERO_BRANCH_TOL`] is reported as
/// [`Error::ZeroProbabilityBranch`] instead of renormalizing noise.
pub fn branch_bell(
    state: &StateVector,
    qa: usize,
    qb: usize,
    kind: BellOutcome,
) -> Result<(f64, StateVector)> {
    let projected = projector(kind).apply(state, &[qa, qb])?;
    let probability = projected.vector().norm_squared();
    if probability <= ZERO_BRANCH_TOL {
        return Err(Error::ZeroProbabilityBranch { outcome: kind });
    }
    let post = StateVector::from_dvector(
        state.num_qubits(),
        projected.vector() / c(probability.sqrt(), 0.0),
    );
    Ok((probability, post))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::{random_haar_unitary, random_state, TOL_ALG};
    use crate::gates::{gate, GateName};

    fn state_diff(a: &StateVector, b: &StateVector) -> f64 {
        (a.vector() - b.vector())
            .iter()
            .map(|z| z.norm())
            .fold(0.0f64, f64::max)
    }

    /// |d⟩ ⊗ |P_U⟩ for m = 1: data qubit 0, program qubits (1, 2) holding
    /// (I ⊗ U)|Φ⁺⟩.
    fn data_with_program(d: &StateVector, u: &Operator) -> StateVector {
        let program = u.apply(&bell_state(BellOutcome::PhiPlus), &[1]).unwrap();
        d.tensor(&program)
    }

    #[test]
    fn phi_plus_amplitudes() {
        let inv = std::f64::consts::FRAC_1_SQRT_2;
        let s = bell_state(BellOutcome::PhiPlus);
        assert!((s.amplitude(0) - c(inv, 0.0)).norm() <= TOL_ALG);
        assert!(s.amplitude(1).norm() <= TOL_ALG);
        assert!(s.amplitude(2).norm() <= TOL_ALG);
        assert!((s.amplitude(3) - c(inv, 0.0)).norm() <= TOL_ALG);
    }

    #[test]
    fn psi_minus_amplitudes() {
        let inv = std::f64::consts::FRAC_1_SQRT_2;
        let s = bell_state(BellOutcome::PsiMinus);
        assert!(s.amplitude(0).norm() <= TOL_ALG);
        assert!((s.amplitude(1) - c(inv, 0.0)).norm() <= TOL_ALG);
        assert!((s.amplitude(2) - c(-inv, 0.0)).norm() <= TOL_ALG);
        assert!(s.amplitude(3).norm() <= TOL_ALG);
    }

    #[test]
    fn bell_states_are_orthonormal() {
        for a in BELL_OUTCOMES {
            for b in BELL_OUTCOMES {
                let ip = bell_state(a).inner_product(&bell_state(b)).unwrap();
                let expected = if a == b { 1.0 } else { 0.0 };
                assert!(
                    (ip - c(expected, 0.0)).norm() <= TOL_ALG,
                    "⟨{a}|{b}⟩ = {ip}"
                );
            }
        }
    }

    #[test]
    fn projectors_sum_to_identity() {
        let mut sum = projector(BellOutcome::PhiPlus).matrix().clone();
        for kind in &BELL_OUTCOMES[1..] {
            sum += projector(*kind).matrix();
        }
        let id = Operator::identity(2);
        let dev = (&sum - id.matrix())
            .iter()
            .map(|z| z.norm())
            .fold(0.0f64, f64::max);
        assert!(dev <= TOL_ALG);
    }

    #[test]
    fn measuring_an_eigenstate_is_deterministic() {
        let phi_plus = bell_state(BellOutcome::PhiPlus);
        for rand in [0.0, 0.3, 0.7, 0.999] {
            let rec = measure_bell(&phi_plus, 0, 1, rand).unwrap();
            assert_eq!(rec.outcome, BellOutcome::PhiPlus);
            assert!((rec.probability - 1.0).abs() <= TOL_ALG);
        }
    }

    #[test]
    fn measuring_00_at_rand_point_three_gives_phi_plus() {
        // |00⟩ = (|Φ⁺⟩ + |Φ⁻⟩)/√2, so the branch probabilities are
        // (½, ½, 0, 0) and the cumulative rule puts 0.3 < 0.5 in PhiPlus.
        let rec = measure_bell(&StateVector::basis(2, 0), 0, 1, 0.3).unwrap();
        assert_eq!(rec.outcome, BellOutcome::PhiPlus);
        assert!((rec.probability - 0.5).abs() <= TOL_ALG);
        assert!(state_diff(&rec.post_state, &bell_state(BellOutcome::PhiPlus)) <= TOL_ALG);
    }

    #[test]
    fn measuring_00_past_half_gives_phi_minus() {
        let rec = measure_bell(&StateVector::basis(2, 0), 0, 1, 0.6).unwrap();
        assert_eq!(rec.outcome, BellOutcome::PhiMinus);
        assert!((rec.probability - 0.5).abs() <= TOL_ALG);
    }

    #[test]
    fn program_state_branches_are_uniform() {
        // Every (d, U) pair gives branch probabilities (¼, ¼, ¼, ¼) when the
        // data qubit is measured jointly with the first program qubit.
        for seed in 0..6u64 {
            let d = random_state(1, 300 + seed);
            let u = random_haar_unitary(1, 400 + seed);
            let state = data_with_program(&d, &u);
            let probs = branch_probabilities(&state, 0, 1).unwrap();
            for (i, p) in probs.iter().enumerate() {
                assert!(
                    (p - 0.25).abs() <= TOL_ALG,
                    "seed {seed}: branch {i} probability {p}"
                );
            }
        }
    }

    #[test]
    fn branch_probabilities_sum_to_one() {
        for seed in 0..8u64 {
            let state = random_state(3, 500 + seed);
            let probs = branch_probabilities(&state, 1, 2).unwrap();
            let total: f64 = probs.iter().sum();
            assert!((total - 1.0).abs() <= TOL_ALG, "seed {seed}: sum {total}");
        }
    }

    #[test]
    fn grid_sweep_reproduces_branch_probabilities() {
        // Sweeping rand over a fine uniform grid, each outcome's frequency
        // must match its branch probability to within the grid resolution.
        let state = gate(GateName::H)
            .apply(&random_state(2, 77), &[0])
            .unwrap();
        let probs = branch_probabilities(&state, 0, 1).unwrap();
        let grid = 4000usize;
        let mut counts = [0usize; 4];
        for i in 0..grid {
            let rand = (i as f64 + 0.5) / grid as f64;
            let rec = measure_bell(&state, 0, 1, rand).unwrap();
            counts[rec.outcome.index()] += 1;
        }
        for slot in 0..4 {
            let freq = counts[slot] as f64 / grid as f64;
            assert!(
                (freq - probs[slot]).abs() <= 1.0 / grid as f64 + TOL_ALG,
                "outcome {slot}: frequency {freq} vs probability {}",
                probs[slot]
            );
        }
    }

    #[test]
    fn branch_bell_on_matching_eigenstate() {
        let (p, post) = branch_bell(
            &bell_state(BellOutcome::PhiPlus),
            0,
            1,
            BellOutcome::PhiPlus,
        )
        .unwrap();
        assert!((p - 1.0).abs() <= TOL_ALG);
        assert!(state_diff(&post, &bell_state(BellOutcome::PhiPlus)) <= TOL_ALG);
    }

    #[test]
    fn branch_bell_signals_impossible_branch() {
        let result = branch_bell(
            &bell_state(BellOutcome::PhiPlus),
            0,
            1,
            BellOutcome::PsiMinus,
        );
        assert!(matches!(
            result,
            Err(Error::ZeroProbabilityBranch {
                outcome: BellOutcome::PsiMinus
            })
        ));
    }

    #[test]
    fn phi_plus_branch_teleports_data_through_program() {
        // Post-selecting PhiPlus on (data, first program qubit) leaves the
        // second program qubit carrying U|d⟩ at probability ¼ exactly.
        for seed in 0..5u64 {
            let d = random_state(1, 600 + seed);
            let u = random_haar_unitary(1, 700 + seed);
            let state = data_with_program(&d, &u);
            let (p, post) = branch_bell(&state, 0, 1, BellOutcome::PhiPlus).unwrap();
            assert!((p - 0.25).abs() <= TOL_ALG);
            let expected = bell_state(BellOutcome::PhiPlus).tensor(&u.apply(&d, &[0]).unwrap());
            assert!(state_diff(&post, &expected) <= TOL_ALG, "seed {seed}");
        }
    }

    #[test]
    fn measure_bell_rejects_bad_rand() {
        let state = StateVector::basis(2, 0);
        assert!(matches!(
            measure_bell(&state, 0, 1, 1.0),
            Err(Error::RandomOutOfRange { .. })
        ));
        assert!(matches!(
            measure_bell(&state, 0, 1, -0.1),
            Err(Error::RandomOutOfRange { .. })
        ));
    }

    #[test]
    fn labels_round_trip() {
        for kind in BELL_OUTCOMES {
            assert_eq!(kind.label().parse::<BellOutcome>().unwrap(), kind);
        }
        assert!("phi".parse::<BellOutcome>().is_err());
    }
}
