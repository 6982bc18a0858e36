//! JSON interchange. Every quantum object travels as one envelope shape,
//! {"num_qubits": n, "kind": ..., "data": ...}, with complex entries spelled
//! as [re, im] pairs:
//!
//! * kind "state": data is a flat amplitude list, basis order,
//! * kind "operator" / "density": data is a row-major matrix,
//! * kind "channel": data is a list of row-major Kraus matrices.
//!
//! Serialization is compact (no whitespace), field order follows the struct
//! declarations here, and numbers use the shortest decimal that round-trips
//! the double, so equal inputs produce byte-identical output. Parsers accept
//! full double precision.
//!
//! Error taxonomy: text that is not the envelope at all reports
//! [`Error::Parse`]; a well-formed envelope with the wrong kind or a data
//! shape that does not match reports [`Error::Format`]; values that parse
//! but fail validation (norms, unitarity, completeness) surface the
//! corresponding domain error.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::core::{DensityMatrix, KrausChannel, Operator, StateVector};
use crate::error::{Error, Result};
use crate::progarray::RunRecord;
use crate::verify::{ImplementationCertificate, SuccessStats, SuiteReport};

type Pair = [f64; 2];

#[derive(Debug, Serialize, Deserialize)]
struct Envelope {
    num_qubits: usize,
    kind: String,
    data: Value,
}

fn parse_envelope(text: &str, expected_kind: &str) -> Result<Envelope> {
    let envelope: Envelope =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if envelope.kind != expected_kind {
        return Err(Error::Format(format!(
            "expected kind {expected_kind:?}, found {:?}",
            envelope.kind
        )));
    }
    Ok(envelope)
}

fn data_as<T: serde::de::DeserializeOwned>(kind: &str, data: Value) -> Result<T> {
    serde_json::from_value(data)
        .map_err(|e| Error::Format(format!("malformed {kind} data: {e}")))
}

fn amplitudes_to_pairs(amps: &[Complex64]) -> Vec<Pair> {
    amps.iter().map(|z| [z.re, z.im]).collect()
}

fn matrix_to_rows(mat: &DMatrix<Complex64>) -> Vec<Vec<Pair>> {
    (0..mat.nrows())
        .map(|r| (0..mat.ncols()).map(|c| [mat[(r, c)].re, mat[(r, c)].im]).collect())
        .collect()
}

fn matrix_from_rows(kind: &str, rows: Vec<Vec<Pair>>) -> Result<DMatrix<Complex64>> {
    let nrows = rows.len();
    if nrows == 0 {
        return Err(Error::Format(format!("{kind} data has no rows")));
    }
    let ncols = rows[0].len();
    if rows.iter().any(|row| row.len() != ncols) {
        return Err(Error::Format(format!("{kind} rows have unequal lengths")));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |r, c| {
        Complex64::new(rows[r][c][0], rows[r][c][1])
    }))
}

fn square_qubits(kind: &str, num_qubits: usize, mat: &DMatrix<Complex64>) -> Result<()> {
    let dim = 1usize << num_qubits;
    if mat.nrows() != dim || mat.ncols() != dim {
        return Err(Error::Format(format!(
            "{kind} on {num_qubits} qubits needs a {dim}x{dim} matrix, found {}x{}",
            mat.nrows(),
            mat.ncols()
        )));
    }
    Ok(())
}

fn compact(value: &impl Serialize) -> String {
    serde_json::to_string(value).expect("wire types serialize")
}

fn state_envelope(s: &StateVector) -> Envelope {
    Envelope {
        num_qubits: s.num_qubits(),
        kind: "state".to_string(),
        data: json!(amplitudes_to_pairs(s.amplitudes())),
    }
}

pub fn state_to_json(s: &StateVector) -> String {
    compact(&state_envelope(s))
}

pub fn parse_state(text: &str) -> Result<StateVector> {
    let envelope = parse_envelope(text, "state")?;
    let pairs: Vec<Pair> = data_as("state", envelope.data)?;
    let amps = pairs
        .into_iter()
        .map(|[re, im]| Complex64::new(re, im))
        .collect();
    StateVector::new(envelope.num_qubits, amps)
}

pub fn operator_to_json(op: &Operator) -> String {
    compact(&Envelope {
        num_qubits: op.num_qubits(),
        kind: "operator".to_string(),
        data: json!(matrix_to_rows(op.matrix())),
    })
}

pub fn parse_operator(text: &str) -> Result<Operator> {
    let envelope = parse_envelope(text, "operator")?;
    let rows: Vec<Vec<Pair>> = data_as("operator", envelope.data)?;
    let mat = matrix_from_rows("operator", rows)?;
    square_qubits("operator", envelope.num_qubits, &mat)?;
    Operator::new(envelope.num_qubits, mat)
}

fn density_envelope(rho: &DensityMatrix) -> Envelope {
    Envelope {
        num_qubits: rho.num_qubits(),
        kind: "density".to_string(),
        data: json!(matrix_to_rows(rho.matrix())),
    }
}

pub fn density_to_json(rho: &DensityMatrix) -> String {
    compact(&density_envelope(rho))
}

pub fn parse_density(text: &str) -> Result<DensityMatrix> {
    let envelope = parse_envelope(text, "density")?;
    let rows: Vec<Vec<Pair>> = data_as("density", envelope.data)?;
    let mat = matrix_from_rows("density", rows)?;
    square_qubits("density", envelope.num_qubits, &mat)?;
    DensityMatrix::new(envelope.num_qubits, mat)
}

pub fn channel_to_json(ch: &KrausChannel) -> String {
    let blocks: Vec<Vec<Vec<Pair>>> = ch
        .kraus_ops()
        .iter()
        .map(|k| matrix_to_rows(k.matrix()))
        .collect();
    compact(&Envelope {
        num_qubits: ch.num_qubits(),
        kind: "channel".to_string(),
        data: json!(blocks),
    })
}

/// Parses a channel block, enforcing completeness within `tol`.
pub fn parse_channel(text: &str, tol: f64) -> Result<KrausChannel> {
    let envelope = parse_envelope(text, "channel")?;
    let blocks: Vec<Vec<Vec<Pair>>> = data_as("channel", envelope.data)?;
    let mut ops = Vec::with_capacity(blocks.len());
    for rows in blocks {
        let mat = matrix_from_rows("channel", rows)?;
        square_qubits("channel", envelope.num_qubits, &mat)?;
        // Individual Kraus operators need not be unitary; completeness is
        // the channel constructor's job.
        ops.push(Operator::new(envelope.num_qubits, mat)?);
    }
    KrausChannel::with_tolerance(ops, tol)
}

#[derive(Serialize)]
struct RunWire {
    outcomes: Vec<&'static str>,
    success: bool,
    branch_probability: f64,
    final_data: Envelope,
}

pub fn run_record_to_json(record: &RunRecord) -> String {
    compact(&RunWire {
        outcomes: record.outcomes.iter().map(|o| o.label()).collect(),
        success: record.success,
        branch_probability: record.branch_probability,
        final_data: state_envelope(&record.final_data),
    })
}

#[derive(Serialize)]
struct StatsWire {
    trials: u64,
    successes: u64,
    p_hat: f64,
    std_err: f64,
    mean_attempts_to_success: Option<f64>,
    master_seed: u64,
}

pub fn stats_to_json(stats: &SuccessStats) -> String {
    compact(&StatsWire {
        trials: stats.trials,
        successes: stats.successes,
        p_hat: stats.p_hat,
        std_err: stats.std_err,
        mean_attempts_to_success: stats.mean_attempts_to_success,
        master_seed: stats.master_seed,
    })
}

#[derive(Serialize)]
struct CertificateWire {
    implemented: bool,
    max_deviation: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    unitary: Option<Envelope>,
}

pub fn certificate_to_json(cert: &ImplementationCertificate) -> String {
    compact(&CertificateWire {
        implemented: cert.implemented,
        max_deviation: cert.max_deviation,
        unitary: cert.unitary.as_ref().map(|u| Envelope {
            num_qubits: u.num_qubits(),
            kind: "operator".to_string(),
            data: json!(matrix_to_rows(u.matrix())),
        }),
    })
}

#[derive(Serialize)]
struct CheckWire<'a> {
    name: &'a str,
    violation: f64,
    tolerance: f64,
    passed: bool,
}

#[derive(Serialize)]
struct SuiteWire<'a> {
    suite: &'a str,
    seed: u64,
    passed: bool,
    max_violation: f64,
    checks: Vec<CheckWire<'a>>,
}

pub fn suite_report_to_json(report: &SuiteReport) -> String {
    compact(&SuiteWire {
        suite: &report.suite,
        seed: report.seed,
        passed: report.passed,
        max_violation: report.max_violation,
        checks: report
            .checks
            .iter()
            .map(|ch| CheckWire {
                name: &ch.name,
                violation: ch.violation,
                tolerance: ch.tolerance,
                passed: ch.passed,
            })
            .collect(),
    })
}

#[derive(Serialize)]
struct BranchWire {
    probability: f64,
    output: Envelope,
}

/// Post-selected pure-state result: success probability plus output state.
pub fn postselect_to_json(probability: f64, output: &StateVector) -> String {
    compact(&BranchWire {
        probability,
        output: state_envelope(output),
    })
}

/// Post-selected channel-mode result: success probability plus output
/// density matrix.
pub fn channel_run_to_json(probability: f64, output: &DensityMatrix) -> String {
    compact(&BranchWire {
        probability,
        output: density_envelope(output),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::{bell_state, BellOutcome};
    use crate::core::{c, random_haar_unitary, random_state, TOL_ALG};
    use crate::gates::{gate, GateName};
    use crate::progarray::{encode_program, run_once};

    #[test]
    fn phi_plus_state_bytes_are_pinned() {
        let text = state_to_json(&bell_state(BellOutcome::PhiPlus));
        assert_eq!(
            text,
            "{\"num_qubits\":2,\"kind\":\"state\",\"data\":\
             [[0.7071067811865476,0.0],[0.0,0.0],[0.0,0.0],[0.7071067811865476,0.0]]}"
        );
    }

    #[test]
    fn hadamard_program_bytes_are_pinned() {
        // Each amplitude is the correctly rounded product of two
        // FRAC_1_SQRT_2 factors, which lands one ulp above 1/2.
        let program = encode_program(&gate(GateName::H)).unwrap();
        assert_eq!(
            state_to_json(program.state()),
            "{\"num_qubits\":2,\"kind\":\"state\",\"data\":\
             [[0.5000000000000001,0.0],[0.5000000000000001,0.0],\
             [0.5000000000000001,0.0],[-0.5000000000000001,0.0]]}"
        );
    }

    #[test]
    fn state_round_trips_exactly() {
        for seed in 0..5u64 {
            let s = random_state(2, seed);
            let back = parse_state(&state_to_json(&s)).unwrap();
            assert_eq!(s.amplitudes(), back.amplitudes());
            assert_eq!(state_to_json(&s), state_to_json(&back));
        }
    }

    #[test]
    fn operator_round_trips_exactly() {
        for seed in 0..5u64 {
            let u = random_haar_unitary(2, seed);
            let back = parse_operator(&operator_to_json(&u)).unwrap();
            assert_eq!(u.matrix(), back.matrix());
        }
    }

    #[test]
    fn density_and_channel_round_trip() {
        let rho = random_state(1, 3).density();
        let back = parse_density(&density_to_json(&rho)).unwrap();
        assert_eq!(rho.matrix(), back.matrix());

        let ch = KrausChannel::amplitude_damping(0.3).unwrap();
        let back = parse_channel(&channel_to_json(&ch), TOL_ALG).unwrap();
        assert_eq!(ch.kraus_ops().len(), back.kraus_ops().len());
        for (a, b) in ch.kraus_ops().iter().zip(back.kraus_ops()) {
            assert_eq!(a.matrix(), b.matrix());
        }
    }

    #[test]
    fn garbage_text_is_a_parse_error() {
        assert!(matches!(parse_state("not json"), Err(Error::Parse(_))));
        assert!(matches!(
            parse_state("{\"num_qubits\":1}"),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn wrong_kind_or_shape_is_a_format_error() {
        let op_text = operator_to_json(&gate(GateName::X));
        assert!(matches!(parse_state(&op_text), Err(Error::Format(_))));

        let bad_shape = "{\"num_qubits\":1,\"kind\":\"state\",\"data\":[[1.0]]}";
        assert!(matches!(parse_state(bad_shape), Err(Error::Format(_))));

        let short_matrix =
            "{\"num_qubits\":2,\"kind\":\"operator\",\"data\":[[[1.0,0.0],[0.0,0.0]],[[0.0,0.0],[1.0,0.0]]]}";
        assert!(matches!(parse_operator(short_matrix), Err(Error::Format(_))));
    }

    #[test]
    fn invalid_values_surface_domain_errors() {
        let unnormalized = "{\"num_qubits\":1,\"kind\":\"state\",\"data\":[[1.0,0.0],[1.0,0.0]]}";
        assert!(matches!(
            parse_state(unnormalized),
            Err(Error::NotNormalized { .. })
        ));

        // Non-unitary matrices parse fine; unitarity is a policy the caller
        // applies with its own tolerance.
        let not_unitary =
            "{\"num_qubits\":1,\"kind\":\"operator\",\"data\":[[[1.0,0.0],[1.0,0.0]],[[0.0,0.0],[1.0,0.0]]]}";
        let parsed = parse_operator(not_unitary).unwrap();
        assert!(!parsed.is_unitary(1e-10));

        // Only the damping K0, so the channel is not trace preserving.
        let incomplete = "{\"num_qubits\":1,\"kind\":\"channel\",\"data\":\
                          [[[[1.0,0.0],[0.0,0.0]],[[0.0,0.0],[0.8,0.0]]]]}";
        assert!(matches!(
            parse_channel(incomplete, TOL_ALG),
            Err(Error::IncompleteChannel { .. })
        ));
    }

    #[test]
    fn run_record_serializes_outcome_labels() {
        // Draw 0.1 lies in the first quarter-width band, so the run lands on
        // the all-phi+ success branch.
        let record = run_once(&gate(GateName::H), &StateVector::basis(1, 0), &[0.1]).unwrap();
        let text = run_record_to_json(&record);
        assert!(text.starts_with("{\"outcomes\":[\"phi+\"],\"success\":true,\"branch_probability\":"));
        assert!(text.contains("\"final_data\":{\"num_qubits\":1,\"kind\":\"state\""));
        assert!(text.ends_with('}'));
    }

    #[test]
    fn stats_field_order_is_pinned() {
        let stats = crate::verify::success_statistics(
            &gate(GateName::H),
            &StateVector::basis(1, 0),
            8,
            5,
        )
        .unwrap();
        let text = stats_to_json(&stats);
        assert!(text.starts_with("{\"trials\":8,\"successes\":"));
        assert!(text.contains("\"p_hat\":"));
        assert!(text.contains("\"std_err\":"));
        assert!(text.contains("\"mean_attempts_to_success\":"));
        assert!(text.ends_with("\"master_seed\":5}"));
    }

    #[test]
    fn negative_certificate_omits_the_unitary_block() {
        let g = gate(GateName::Cnot).expand(2, &[1, 0]).unwrap();
        let inv = std::f64::consts::FRAC_1_SQRT_2;
        let plus = StateVector::new(1, vec![c(inv, 0.0), c(inv, 0.0)]).unwrap();
        let cert = crate::verify::extract_implemented_unitary(&g, &plus).unwrap();
        let text = certificate_to_json(&cert);
        assert!(text.starts_with("{\"implemented\":false,\"max_deviation\":"));
        assert!(!text.contains("unitary"));

        let pos = crate::verify::extract_implemented_unitary(
            &gate(GateName::X).tensor(&Operator::identity(1)),
            &StateVector::basis(1, 0),
        )
        .unwrap();
        let text = certificate_to_json(&pos);
        assert!(text.contains("\"unitary\":{\"num_qubits\":1,\"kind\":\"operator\""));
    }

    #[test]
    fn named_gate_file_equivalence_holds_through_the_wire() {
        // A file carrying H's matrix must behave exactly like the name "h".
        let written = operator_to_json(&gate(GateName::H));
        let parsed = parse_operator(&written).unwrap();
        assert!((parsed.matrix() - gate(GateName::H).matrix()).norm() <= TOL_ALG);
    }

    #[test]
    fn branch_wires_carry_probability_then_output() {
        let rho = StateVector::basis(1, 0).density();
        let text = channel_run_to_json(0.25, &rho);
        assert!(text.starts_with("{\"probability\":0.25,\"output\":{\"num_qubits\":1,\"kind\":\"density\""));

        let text = postselect_to_json(0.25, &StateVector::basis(1, 1));
        assert!(text.starts_with("{\"probability\":0.25,\"output\":{\"num_qubits\":1,\"kind\":\"state\""));
    }
}
