//! Verification machinery: which unitary does an arbitrary array implement,
//! do residual programs depend on the data, does the inner-product identity
//! hold, are deterministic programs orthogonal, and do sampled success rates
//! match 2^(−2m). Also home of the named check suites the CLI exposes.
//!
//! # Reproducibility
//!
//! Every randomized operation takes an explicit 64-bit seed. Per-trial (or
//! per-instance) generators are seeded with [`mix_seed`], a fixed avalanche
//! permutation of master_seed XOR index, so results are identical no matter
//! how trials are scheduled or parallelized.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bell::BELL_OUTCOMES;
use crate::core::{
    c, random_haar_unitary, random_state, Operator, StateVector, TOL_ALG, TOL_CERT,
};
use crate::error::{Error, Result};
use crate::gates::{gate, GateName};
use crate::progarray::{
    branch_run, deterministic_array, encode_program, residual_correction, run_once,
};

/// Derives the generator seed for one trial from the master seed: the
/// splitmix64 finalizer applied to master_seed XOR trial_index.
///
/// z = master_seed ^ trial_index
/// z = (z ^ (z >> 30)) · 0xbf58476d1ce4e5b9
/// z = (z ^ (z >> 27)) · 0x94d049bb133111eb
/// z ^ (z >> 31)
///
/// This function is part of the external reproducibility contract; changing
/// it changes every seeded output.
pub fn mix_seed(master_seed: u64, trial_index: u64) -> u64 {
    let mut z = master_seed ^ trial_index;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Outcome of asking whether a fixed array g implements some unitary for a
/// given program state.
#[derive(Debug, Clone, PartialEq)]
pub struct ImplementationCertificate {
    /// True iff every data basis state comes out as (column) ⊗ (common
    /// residual) within [`TOL_CERT`] and the assembled columns form a
    /// unitary.
    pub implemented: bool,
    /// The implemented operation, present only on positive certificates.
    /// Determined up to a global phase shared inversely with
    /// `residual_program`.
    pub unitary: Option<Operator>,
    /// The data-independent residual program state |P′⟩.
    pub residual_program: Option<StateVector>,
    /// Worst factorization defect observed: second Schmidt coefficient,
    /// pairwise residual disagreement, or unitarity deviation, whichever is
    /// largest.
    pub max_deviation: f64,
}

/// Amplitudes of `state` as a 2^m × 2^(n−m) matrix: row = data index (the
/// high-order bits), column = program index.
fn amplitude_matrix(state: &StateVector, m: usize) -> DMatrix<Complex64> {
    let n = state.num_qubits() - m;
    let rows = 1usize << m;
    let cols = 1usize << n;
    DMatrix::from_fn(rows, cols, |r, q| state.amplitude((r << n) | q))
}

/// Splits a bipartite state into dominant product factors by SVD.
///
/// Returns (data factor, program factor, second singular value). The
/// program factor is gauge-fixed by rotating its largest entry onto the
/// positive real axis, so repeated extractions agree up to that rule. The
/// data factor is the exact contraction M·conj(χ), which carries the
/// dominant singular value as its norm.
fn dominant_factors(
    state: &StateVector,
    m: usize,
) -> (DVector<Complex64>, DVector<Complex64>, f64) {
    let mat = amplitude_matrix(state, m);
    let svd = mat.clone().svd(true, true);
    let sv = &svd.singular_values;
    // nalgebra does not promise an ordering, so find the two largest.
    let mut best = 0usize;
    for i in 1..sv.len() {
        if sv[i] > sv[best] {
            best = i;
        }
    }
    let mut second = 0.0f64;
    for i in 0..sv.len() {
        if i != best {
            second = second.max(sv[i]);
        }
    }
    // The amplitude matrix of a product state φ ⊗ χ is the outer product
    // φ χᵀ, while the SVD writes it σ u v^H; the dominant row of v^H is
    // already the conjugated right singular vector, i.e. χ itself.
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let mut chi: DVector<Complex64> = v_t.row(best).transpose();
    let mut peak = 0usize;
    for i in 1..chi.len() {
        if chi[i].norm() > chi[peak].norm() {
            peak = i;
        }
    }
    if chi[peak].norm() > 0.0 {
        let phase = chi[peak] / chi[peak].norm();
        chi *= phase.conj();
    }
    let phi = &mat * chi.map(|z| z.conj());
    (phi, chi, second)
}

/// Tests the implementation contract: g maps |d⟩⊗|p⟩ to (U|d⟩)⊗|p′⟩ with a
/// data-independent |p′⟩. Probes every data basis state, demands Schmidt
/// rank one and a common residual within [`TOL_CERT`], assembles U from the
/// resulting columns, and validates its unitarity. Non-implementation is a
/// negative certificate, not an error.
pub fn extract_implemented_unitary(
    g: &Operator,
    p: &StateVector,
) -> Result<ImplementationCertificate> {
    g.require_unitary(TOL_ALG)?;
    let total = g.num_qubits();
    let n = p.num_qubits();
    if n >= total {
        return Err(Error::DimensionMismatch {
            expected: total.saturating_sub(1),
            actual: n,
        });
    }
    let m = total - n;
    let data_dim = 1usize << m;
    let mut outputs = Vec::with_capacity(data_dim);
    let mut residuals = Vec::with_capacity(data_dim);
    let mut max_deviation = 0.0f64;
    for j in 0..data_dim {
        let out = g.apply_full(&StateVector::basis(m, j).tensor(p))?;
        let (_, chi, second) = dominant_factors(&out, m);
        max_deviation = max_deviation.max(second);
        outputs.push(out);
        residuals.push(chi);
    }
    for a in 0..data_dim {
        for b in (a + 1)..data_dim {
            let agree = residuals[a].dotc(&residuals[b]).norm();
            max_deviation = max_deviation.max(1.0 - agree);
        }
    }
    // One common residual pins every column's relative phase; the leftover
    // global phase of chi cancels against the assembled unitary's.
    let chi = residuals[0].clone();
    let chi_conj = chi.map(|z| z.conj());
    let mut u_mat = DMatrix::from_element(data_dim, data_dim, c(0.0, 0.0));
    for (j, out) in outputs.iter().enumerate() {
        let column = amplitude_matrix(out, m) * &chi_conj;
        u_mat.set_column(j, &column);
    }
    let unitary = Operator::new(m, u_mat)?;
    max_deviation = max_deviation.max(unitary.unitarity_deviation());
    let implemented = max_deviation <= TOL_CERT;
    Ok(ImplementationCertificate {
        implemented,
        unitary: implemented.then_some(unitary),
        residual_program: implemented.then(|| StateVector::from_dvector(n, chi)),
        max_deviation,
    })
}

/// Measures how much the residual program depends on the data state: runs
/// `num_samples` random data states through g and returns the worst pairwise
/// disagreement 1 − |⟨P′_i|P′_j⟩|. Requires a positive certificate first.
pub fn check_program_independence(
    g: &Operator,
    p: &StateVector,
    num_samples: usize,
    seed: u64,
) -> Result<f64> {
    let cert = extract_implemented_unitary(g, p)?;
    if !cert.implemented {
        return Err(Error::NotImplementedByArray {
            deviation: cert.max_deviation,
        });
    }
    let m = g.num_qubits() - p.num_qubits();
    let mut residuals = Vec::with_capacity(num_samples);
    for k in 0..num_samples {
        let d = random_state(m, mix_seed(seed, k as u64));
        let out = g.apply_full(&d.tensor(p))?;
        let (_, chi, _) = dominant_factors(&out, m);
        residuals.push(chi);
    }
    let mut worst = 0.0f64;
    for a in 0..residuals.len() {
        for b in (a + 1)..residuals.len() {
            worst = worst.max(1.0 - residuals[a].dotc(&residuals[b]).norm());
        }
    }
    Ok(worst)
}

/// Evaluates both sides of the inner-product identity
/// ⟨Q|P⟩ = ⟨Q′|P′⟩ · ⟨d|U_q† U_p|d⟩ on `num_samples` random data states and
/// returns the maximum absolute difference. Both programs must certify.
pub fn inner_product_identity(
    g: &Operator,
    p: &StateVector,
    q: &StateVector,
    num_samples: usize,
    seed: u64,
) -> Result<f64> {
    let cert_p = extract_implemented_unitary(g, p)?;
    let cert_q = extract_implemented_unitary(g, q)?;
    for cert in [&cert_p, &cert_q] {
        if !cert.implemented {
            return Err(Error::NotImplementedByArray {
                deviation: cert.max_deviation,
            });
        }
    }
    let lhs = q.inner_product(p)?;
    let residual_factor = cert_q
        .residual_program
        .as_ref()
        .expect("positive certificate")
        .inner_product(cert_p.residual_program.as_ref().expect("positive certificate"))?;
    let u_p = cert_p.unitary.as_ref().expect("positive certificate");
    let u_q = cert_q.unitary.as_ref().expect("positive certificate");
    let op = u_q.adjoint().compose(u_p)?;
    let m = op.num_qubits();
    let mut worst = 0.0f64;
    for k in 0..num_samples {
        let d = random_state(m, mix_seed(seed, k as u64));
        let bracket = d.inner_product(&op.apply_full(&d)?)?;
        worst = worst.max((lhs - residual_factor * bracket).norm());
    }
    Ok(worst)
}

/// One program pair in an orthogonality report.
#[derive(Debug, Clone, PartialEq)]
pub struct PairReport {
    pub i: usize,
    pub j: usize,
    /// |⟨P_i|P_j⟩|.
    pub overlap: f64,
    /// True iff the implemented unitaries differ by more than a global
    /// phase; only such pairs are bound by the orthogonality requirement.
    pub distinct: bool,
    pub violation: bool,
}

/// Result of the orthogonality theorem check over a program family.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthogonalityReport {
    pub pairs: Vec<PairReport>,
    /// Largest overlap among distinct-up-to-phase pairs.
    pub max_violation: f64,
    pub passed: bool,
}

/// Checks that programs implementing distinct-up-to-phase unitaries under g
/// are mutually orthogonal within [`TOL_CERT`]. Pairs whose unitaries agree
/// up to a global phase are reported but exempt. Every program must certify.
pub fn orthogonality_theorem_check(
    g: &Operator,
    programs: &[StateVector],
) -> Result<OrthogonalityReport> {
    let mut certs = Vec::with_capacity(programs.len());
    for p in programs {
        let cert = extract_implemented_unitary(g, p)?;
        if !cert.implemented {
            return Err(Error::NotImplementedByArray {
                deviation: cert.max_deviation,
            });
        }
        certs.push(cert);
    }
    let mut pairs = Vec::new();
    let mut max_violation = 0.0f64;
    for i in 0..programs.len() {
        for j in (i + 1)..programs.len() {
            let u_i = certs[i].unitary.as_ref().expect("positive certificate");
            let u_j = certs[j].unitary.as_ref().expect("positive certificate");
            let distinct = !u_i.equal_up_to_global_phase(u_j, TOL_CERT)?;
            let overlap = programs[i].inner_product(&programs[j])?.norm();
            let violation = distinct && overlap > TOL_CERT;
            if distinct {
                max_violation = max_violation.max(overlap);
            }
            pairs.push(PairReport {
                i,
                j,
                overlap,
                distinct,
                violation,
            });
        }
    }
    let passed = pairs.iter().all(|p| !p.violation);
    Ok(OrthogonalityReport {
        pairs,
        max_violation,
        passed,
    })
}

/// Monte Carlo summary of repeated array runs.
#[derive(Debug, Clone, PartialEq)]
pub struct SuccessStats {
    pub trials: u64,
    pub successes: u64,
    /// successes / trials.
    pub p_hat: f64,
    /// sqrt(p_hat (1 − p_hat) / trials).
    pub std_err: f64,
    /// Mean length of the completed attempt streaks ending in a success,
    /// scanning trials in index order; None when no trial succeeded.
    /// Compares against the theoretical 2^(2m).
    pub mean_attempts_to_success: Option<f64>,
    pub master_seed: u64,
}

fn stats_from_flags(flags: &[bool], master_seed: u64) -> SuccessStats {
    let trials = flags.len() as u64;
    let mut successes = 0u64;
    let mut completed_attempts = 0u64;
    let mut streak = 0u64;
    for &hit in flags {
        streak += 1;
        if hit {
            successes += 1;
            completed_attempts += streak;
            streak = 0;
        }
    }
    let p_hat = successes as f64 / trials as f64;
    let std_err = (p_hat * (1.0 - p_hat) / trials as f64).sqrt();
    let mean_attempts_to_success =
        (successes > 0).then(|| completed_attempts as f64 / successes as f64);
    SuccessStats {
        trials,
        successes,
        p_hat,
        std_err,
        mean_attempts_to_success,
        master_seed,
    }
}

fn trial_is_success(u: &Operator, d: &StateVector, master_seed: u64, index: u64) -> Result<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(master_seed, index));
    let draws: Vec<f64> = (0..u.num_qubits()).map(|_| rng.random::<f64>()).collect();
    Ok(run_once(u, d, &draws)?.success)
}

/// Runs `trials` independent array executions with per-trial seeds derived
/// by [`mix_seed`] and summarizes the success statistics. Trial order is the
/// index order regardless of scheduling, so the result is a pure function of
/// (u, d, trials, master_seed).
pub fn success_statistics(
    u: &Operator,
    d: &StateVector,
    trials: u64,
    master_seed: u64,
) -> Result<SuccessStats> {
    if trials == 0 {
        return Err(Error::ParameterOutOfRange {
            name: "trials",
            value: 0.0,
        });
    }
    let flags = (0..trials)
        .map(|k| trial_is_success(u, d, master_seed, k))
        .collect::<Result<Vec<bool>>>()?;
    Ok(stats_from_flags(&flags, master_seed))
}

/// Same contract and identical output as [`success_statistics`], with the
/// trials fanned out across threads. Flags are gathered back into index
/// order before the reduction, so the statistics are bitwise equal to the
/// serial path.
pub fn success_statistics_parallel(
    u: &Operator,
    d: &StateVector,
    trials: u64,
    master_seed: u64,
) -> Result<SuccessStats> {
    if trials == 0 {
        return Err(Error::ParameterOutOfRange {
            name: "trials",
            value: 0.0,
        });
    }
    let flags = (0..trials)
        .into_par_iter()
        .map(|k| trial_is_success(u, d, master_seed, k))
        .collect::<Result<Vec<bool>>>()?;
    Ok(stats_from_flags(&flags, master_seed))
}

/// ⟨P_U|P_V⟩ computed from the operators alone: tr(U†V)/2^m. Programs for
/// distinct unitaries need not be orthogonal, unlike the deterministic case.
pub fn program_overlap(u: &Operator, v: &Operator) -> Result<Complex64> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            actual: v.dim(),
        });
    }
    u.require_unitary(TOL_ALG)?;
    v.require_unitary(TOL_ALG)?;
    let product = u.adjoint().compose(v)?;
    Ok(product.trace() / c(u.dim() as f64, 0.0))
}

/// One named assertion inside a suite.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: String,
    /// Measured defect for this instance.
    pub violation: f64,
    /// Bound the defect must stay under.
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckReport {
    fn new(name: impl Into<String>, violation: f64, tolerance: f64) -> Self {
        let passed = violation <= tolerance;
        Self {
            name: name.into(),
            violation,
            tolerance,
            passed,
        }
    }
}

/// Aggregate outcome of one verification suite.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub passed: bool,
    pub max_violation: f64,
    pub checks: Vec<CheckReport>,
}

impl SuiteReport {
    fn from_checks(suite: &str, seed: u64, checks: Vec<CheckReport>) -> Self {
        let passed = checks.iter().all(|ch| ch.passed);
        let max_violation = checks.iter().map(|ch| ch.violation).fold(0.0f64, f64::max);
        Self {
            suite: suite.to_string(),
            seed,
            passed,
            max_violation,
            checks,
        }
    }
}

/// Dispatches a named suite: orthogonality, identity, independence, overlap,
/// or residuals.
pub fn run_suite(name: &str, seed: u64) -> Result<SuiteReport> {
    match name {
        "orthogonality" => suite_orthogonality(seed),
        "identity" => suite_identity(seed),
        "independence" => suite_independence(seed),
        "overlap" => suite_overlap(seed),
        "residuals" => suite_residuals(seed),
        other => Err(Error::Parse(format!("unknown suite {other:?}"))),
    }
}

/// Orthogonality of deterministic programs: the fixed {X, Z, H} array plus
/// 20 random controlled-select instances, exhaustive pair scan each.
pub fn suite_orthogonality(seed: u64) -> Result<SuiteReport> {
    let mut checks = Vec::new();
    let (g, programs) = deterministic_array(&[
        gate(GateName::X),
        gate(GateName::Z),
        gate(GateName::H),
    ])?;
    let report = orthogonality_theorem_check(&g, &programs)?;
    checks.push(CheckReport::new(
        "deterministic_x_z_h",
        report.max_violation,
        TOL_CERT,
    ));
    for k in 0..20u64 {
        let count = 2 + (k % 3) as usize;
        let unitaries: Vec<Operator> = (0..count)
            .map(|i| random_haar_unitary(1, mix_seed(seed, 100 * k + i as u64)))
            .collect();
        let (g, programs) = deterministic_array(&unitaries)?;
        let report = orthogonality_theorem_check(&g, &programs)?;
        checks.push(CheckReport::new(
            format!("random_select_{k}_n{count}"),
            report.max_violation,
            TOL_CERT,
        ));
    }
    Ok(SuiteReport::from_checks("orthogonality", seed, checks))
}

/// The inner-product identity on fixed and randomized instances, 20 data
/// states each.
pub fn suite_identity(seed: u64) -> Result<SuiteReport> {
    const SAMPLES: usize = 20;
    let mut checks = Vec::new();

    let u = random_haar_unitary(1, mix_seed(seed, 1));
    let g_prod = u.tensor(&Operator::identity(1));
    let p_random = random_state(1, mix_seed(seed, 2));
    checks.push(CheckReport::new(
        "same_program",
        inner_product_identity(&g_prod, &p_random, &p_random, SAMPLES, mix_seed(seed, 3))?,
        TOL_CERT,
    ));

    let (g_xz, programs_xz) = deterministic_array(&[gate(GateName::X), gate(GateName::Z)])?;
    checks.push(CheckReport::new(
        "deterministic_x_z",
        inner_product_identity(
            &g_xz,
            &programs_xz[0],
            &programs_xz[1],
            SAMPLES,
            mix_seed(seed, 4),
        )?,
        TOL_CERT,
    ));

    // Two operations equal up to a global phase: the overlap of their
    // residual programs may stay nonzero and the identity must still hold.
    let phase = c(0.0, std::f64::consts::FRAC_PI_4).exp();
    let (g_phase, programs_phase) =
        deterministic_array(&[Operator::identity(1), Operator::identity(1).scale(phase)])?;
    checks.push(CheckReport::new(
        "phase_pair",
        inner_product_identity(
            &g_phase,
            &programs_phase[0],
            &programs_phase[1],
            SAMPLES,
            mix_seed(seed, 5),
        )?,
        TOL_CERT,
    ));

    let inv = std::f64::consts::FRAC_1_SQRT_2;
    let plus = StateVector::new(1, vec![c(inv, 0.0), c(inv, 0.0)])
        .expect("|+> is normalized");
    checks.push(CheckReport::new(
        "overlapping_programs",
        inner_product_identity(
            &g_prod,
            &StateVector::basis(1, 0),
            &plus,
            SAMPLES,
            mix_seed(seed, 6),
        )?,
        TOL_CERT,
    ));

    for k in 0..10u64 {
        let u = random_haar_unitary(1, mix_seed(seed, 10 + 4 * k));
        let v = random_haar_unitary(1, mix_seed(seed, 11 + 4 * k));
        let g = u.tensor(&v);
        let p = random_state(1, mix_seed(seed, 12 + 4 * k));
        let q = random_state(1, mix_seed(seed, 13 + 4 * k));
        checks.push(CheckReport::new(
            format!("random_product_{k}"),
            inner_product_identity(&g, &p, &q, SAMPLES, mix_seed(seed, 1000 + k))?,
            TOL_CERT,
        ));
    }
    Ok(SuiteReport::from_checks("identity", seed, checks))
}

/// Residual-program independence from the data state, 10 samples per
/// instance, plus rejection of a non-implementing instance.
pub fn suite_independence(seed: u64) -> Result<SuiteReport> {
    const SAMPLES: usize = 10;
    let mut checks = Vec::new();

    let g_h = gate(GateName::H).tensor(&Operator::identity(1));
    let p = random_state(1, mix_seed(seed, 1));
    checks.push(CheckReport::new(
        "h_tensor_i",
        check_program_independence(&g_h, &p, SAMPLES, mix_seed(seed, 2))?,
        TOL_CERT,
    ));

    let (g_xz, programs_xz) = deterministic_array(&[gate(GateName::X), gate(GateName::Z)])?;
    checks.push(CheckReport::new(
        "deterministic_x_z_p1",
        check_program_independence(&g_xz, &programs_xz[1], SAMPLES, mix_seed(seed, 3))?,
        TOL_CERT,
    ));

    for k in 0..10u64 {
        let u = random_haar_unitary(1, mix_seed(seed, 20 + 3 * k));
        let v = random_haar_unitary(1, mix_seed(seed, 21 + 3 * k));
        let g = u.tensor(&v);
        let p = random_state(1, mix_seed(seed, 22 + 3 * k));
        checks.push(CheckReport::new(
            format!("random_product_{k}"),
            check_program_independence(&g, &p, SAMPLES, mix_seed(seed, 2000 + k))?,
            TOL_CERT,
        ));
    }

    // A CNOT driven by the program register entangles the registers for
    // program |+⟩; independence must refuse the instance outright.
    let g_neg = gate(GateName::Cnot).expand(2, &[1, 0])?;
    let inv = std::f64::consts::FRAC_1_SQRT_2;
    let plus = StateVector::new(1, vec![c(inv, 0.0), c(inv, 0.0)])
        .expect("|+> is normalized");
    let rejected = matches!(
        check_program_independence(&g_neg, &plus, SAMPLES, mix_seed(seed, 4)),
        Err(Error::NotImplementedByArray { .. })
    );
    checks.push(CheckReport::new(
        "non_implementing_instance_rejected",
        if rejected { 0.0 } else { 1.0 },
        0.5,
    ));
    Ok(SuiteReport::from_checks("independence", seed, checks))
}

/// Program overlaps: tr(U†V)/2^m against the literal state inner product,
/// fixed examples plus 20 random pairs over m = 1 and 2.
pub fn suite_overlap(seed: u64) -> Result<SuiteReport> {
    let mut checks = Vec::new();

    let dual = |name: &str, u: &Operator, v: &Operator| -> Result<CheckReport> {
        let from_trace = program_overlap(u, v)?;
        let from_states = encode_program(u)?
            .state()
            .inner_product(encode_program(v)?.state())?;
        Ok(CheckReport::new(
            name,
            (from_trace - from_states).norm(),
            TOL_ALG,
        ))
    };

    let u_self = random_haar_unitary(1, mix_seed(seed, 1));
    checks.push(CheckReport::new(
        "self_overlap_is_one",
        (program_overlap(&u_self, &u_self)? - c(1.0, 0.0)).norm(),
        TOL_ALG,
    ));
    checks.push(CheckReport::new(
        "x_z_overlap_is_zero",
        program_overlap(&gate(GateName::X), &gate(GateName::Z))?.norm(),
        TOL_ALG,
    ));
    // tr(H) = 0, so the identity/Hadamard pair is orthogonal despite the
    // operators being far from orthogonal-looking.
    checks.push(CheckReport::new(
        "i_h_overlap_is_zero",
        program_overlap(&gate(GateName::I), &gate(GateName::H))?.norm(),
        TOL_ALG,
    ));
    checks.push(dual("i_h_dual", &gate(GateName::I), &gate(GateName::H))?);

    for k in 0..20u64 {
        let m = 1 + (k % 2) as usize;
        let u = random_haar_unitary(m, mix_seed(seed, 30 + 2 * k));
        let v = random_haar_unitary(m, mix_seed(seed, 31 + 2 * k));
        checks.push(dual(&format!("random_pair_{k}_m{m}"), &u, &v)?);
    }
    Ok(SuiteReport::from_checks("overlap", seed, checks))
}

/// The failure-branch table: every outcome tuple for m = 1 and m = 2 must
/// leave the lower register in phase · U · (⊗σ)|d⟩.
pub fn suite_residuals(seed: u64) -> Result<SuiteReport> {
    let mut checks = Vec::new();
    let mut check_branch = |m: usize,
                            tuple: &[crate::bell::BellOutcome],
                            name: String,
                            salt: u64|
     -> Result<()> {
        let u = random_haar_unitary(m, mix_seed(seed, 2 * salt));
        let d = random_state(m, mix_seed(seed, 2 * salt + 1));
        let (probability, residual) = branch_run(&u, &d, tuple)?;
        let correction = residual_correction(tuple)?;
        let expected = u
            .compose(&correction.operator())?
            .apply(&d, &(0..m).collect::<Vec<_>>())?;
        let state_dev = (residual.vector() - expected.vector())
            .iter()
            .map(|z| z.norm())
            .fold(0.0f64, f64::max);
        let prob_dev = (probability - 0.25f64.powi(m as i32)).abs();
        checks.push(CheckReport::new(name, state_dev.max(prob_dev), TOL_ALG));
        Ok(())
    };
    for (slot, &kind) in BELL_OUTCOMES.iter().enumerate() {
        check_branch(1, &[kind], format!("m1_{}", kind.label()), slot as u64)?;
    }
    for (s0, &t0) in BELL_OUTCOMES.iter().enumerate() {
        for (s1, &t1) in BELL_OUTCOMES.iter().enumerate() {
            check_branch(
                2,
                &[t0, t1],
                format!("m2_{}_{}", t0.label(), t1.label()),
                (10 + 4 * s0 + s1) as u64,
            )?;
        }
    }
    Ok(SuiteReport::from_checks("residuals", seed, checks))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::progarray::postselect;

    fn state_diff(a: &StateVector, b: &StateVector) -> f64 {
        (a.vector() - b.vector())
            .iter()
            .map(|z| z.norm())
            .fold(0.0f64, f64::max)
    }

    #[test]
    fn mix_seed_is_deterministic_and_spreads() {
        assert_eq!(mix_seed(0, 0), 0);
        assert_eq!(mix_seed(42, 7), mix_seed(42, 7));
        assert_ne!(mix_seed(42, 7), mix_seed(42, 8));
        assert_ne!(mix_seed(42, 7), mix_seed(43, 7));
        // Neighboring indices must land far apart for the trials to be
        // statistically independent streams.
        let a = mix_seed(1, 0);
        let b = mix_seed(1, 1);
        assert!((a ^ b).count_ones() > 10);
    }

    #[test]
    fn product_dynamics_certify_with_the_left_factor() {
        for seed in 0..5u64 {
            let u = random_haar_unitary(1, 500 + seed);
            let g = u.tensor(&Operator::identity(1));
            for p in [
                StateVector::basis(1, 0),
                StateVector::basis(1, 1),
                random_state(1, 600 + seed),
            ] {
                let cert = extract_implemented_unitary(&g, &p).unwrap();
                assert!(cert.implemented, "seed {seed}: deviation {}", cert.max_deviation);
                let extracted = cert.unitary.unwrap();
                assert!(extracted.equal_up_to_global_phase(&u, TOL_CERT).unwrap());
                let residual = cert.residual_program.unwrap();
                assert!(
                    residual.equal_up_to_global_phase(&p, TOL_CERT).unwrap(),
                    "seed {seed}"
                );
            }
        }
    }

    #[test]
    fn certificate_gauge_reconstructs_the_dynamics() {
        // (extracted U, residual) must reproduce g exactly as a pair even
        // though each is only phase-determined individually.
        let u = random_haar_unitary(1, 77);
        let g = u.tensor(&Operator::identity(1));
        let p = random_state(1, 78);
        let cert = extract_implemented_unitary(&g, &p).unwrap();
        let extracted = cert.unitary.unwrap();
        let residual = cert.residual_program.unwrap();
        for j in 0..2usize {
            let out = g
                .apply_full(&StateVector::basis(1, j).tensor(&p))
                .unwrap();
            let rebuilt = extracted
                .apply(&StateVector::basis(1, j), &[0])
                .unwrap()
                .tensor(&residual);
            assert!(state_diff(&out, &rebuilt) <= 1e-10, "column {j}");
        }
    }

    #[test]
    fn deterministic_array_programs_certify_each_unitary() {
        let unitaries = [gate(GateName::X), gate(GateName::Z)];
        let (g, programs) = deterministic_array(&unitaries).unwrap();
        for (i, u) in unitaries.iter().enumerate() {
            let cert = extract_implemented_unitary(&g, &programs[i]).unwrap();
            assert!(cert.implemented);
            assert!(cert
                .unitary
                .unwrap()
                .equal_up_to_global_phase(u, TOL_CERT)
                .unwrap());
            // The controlled-select form leaves the program untouched.
            let residual = cert.residual_program.unwrap();
            assert!(residual
                .equal_up_to_global_phase(&programs[i], TOL_CERT)
                .unwrap());
        }
    }

    #[test]
    fn program_driven_cnot_on_plus_is_rejected() {
        // Program |+⟩ controlling an X on the data register entangles the
        // output: Schmidt coefficients (1/√2, 1/√2) on basis data.
        let g = gate(GateName::Cnot).expand(2, &[1, 0]).unwrap();
        let inv = std::f64::consts::FRAC_1_SQRT_2;
        let plus = StateVector::new(1, vec![c(inv, 0.0), c(inv, 0.0)]).unwrap();
        let out = g
            .apply_full(&StateVector::basis(1, 0).tensor(&plus))
            .unwrap();
        let (_, _, second) = dominant_factors(&out, 1);
        assert!((second - inv).abs() <= 1e-10, "Schmidt defect {second}");
        let cert = extract_implemented_unitary(&g, &plus).unwrap();
        assert!(!cert.implemented);
        assert!(cert.unitary.is_none());
        assert!(cert.max_deviation >= inv - 1e-10);
    }

    #[test]
    fn data_driven_cnot_residuals_disagree_on_basis_program() {
        // With the data register as control and program |0⟩, each data basis
        // state stays product but the residual flips with the data, which
        // the pairwise-agreement check catches.
        let g = gate(GateName::Cnot);
        let cert = extract_implemented_unitary(&g, &StateVector::basis(1, 0)).unwrap();
        assert!(!cert.implemented);
        assert!((cert.max_deviation - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn data_driven_cnot_on_plus_implements_identity() {
        // |+⟩ is the X eigenstate, so a data-controlled X on the program
        // register acts as the identity on the data: a positive instance.
        let g = gate(GateName::Cnot);
        let inv = std::f64::consts::FRAC_1_SQRT_2;
        let plus = StateVector::new(1, vec![c(inv, 0.0), c(inv, 0.0)]).unwrap();
        let cert = extract_implemented_unitary(&g, &plus).unwrap();
        assert!(cert.implemented);
        assert!(cert
            .unitary
            .unwrap()
            .equal_up_to_global_phase(&Operator::identity(1), TOL_CERT)
            .unwrap());
    }

    #[test]
    fn independence_holds_on_product_instances() {
        let g = gate(GateName::H).tensor(&Operator::identity(1));
        let worst = check_program_independence(&g, &random_state(1, 9), 10, 11).unwrap();
        assert!(worst <= 1e-10);

        let (g_xz, programs) = deterministic_array(&[gate(GateName::X), gate(GateName::Z)]).unwrap();
        let worst = check_program_independence(&g_xz, &programs[1], 10, 12).unwrap();
        assert!(worst <= 1e-10);
    }

    #[test]
    fn independence_rejects_non_implementing_program() {
        let g = gate(GateName::Cnot).expand(2, &[1, 0]).unwrap();
        let inv = std::f64::consts::FRAC_1_SQRT_2;
        let plus = StateVector::new(1, vec![c(inv, 0.0), c(inv, 0.0)]).unwrap();
        assert!(matches!(
            check_program_independence(&g, &plus, 5, 13),
            Err(Error::NotImplementedByArray { .. })
        ));
    }

    #[test]
    fn identity_on_same_program_is_trivial() {
        let u = random_haar_unitary(1, 14);
        let g = u.tensor(&Operator::identity(1));
        let p = random_state(1, 15);
        let violation = inner_product_identity(&g, &p, &p, 10, 16).unwrap();
        assert!(violation <= 1e-10);
    }

    #[test]
    fn identity_on_orthogonal_deterministic_programs() {
        let (g, programs) = deterministic_array(&[gate(GateName::X), gate(GateName::Z)]).unwrap();
        let violation = inner_product_identity(&g, &programs[0], &programs[1], 10, 17).unwrap();
        assert!(violation <= 1e-10);
    }

    #[test]
    fn identity_with_overlapping_programs() {
        let u = random_haar_unitary(1, 18);
        let g = u.tensor(&Operator::identity(1));
        let inv = std::f64::consts::FRAC_1_SQRT_2;
        let plus = StateVector::new(1, vec![c(inv, 0.0), c(inv, 0.0)]).unwrap();
        let violation =
            inner_product_identity(&g, &StateVector::basis(1, 0), &plus, 10, 19).unwrap();
        assert!(violation <= 1e-10);
    }

    #[test]
    fn orthogonality_of_x_z_h_array() {
        let (g, programs) = deterministic_array(&[
            gate(GateName::X),
            gate(GateName::Z),
            gate(GateName::H),
        ])
        .unwrap();
        let report = orthogonality_theorem_check(&g, &programs).unwrap();
        assert!(report.passed);
        assert_eq!(report.pairs.len(), 3);
        assert!(report.pairs.iter().all(|p| p.distinct));
        assert!(report.max_violation <= 1e-10);
    }

    #[test]
    fn phase_equal_unitaries_are_exempt() {
        let u = random_haar_unitary(1, 20);
        let g = u.tensor(&Operator::identity(1));
        let inv = std::f64::consts::FRAC_1_SQRT_2;
        let plus = StateVector::new(1, vec![c(inv, 0.0), c(inv, 0.0)]).unwrap();
        let programs = vec![StateVector::basis(1, 0), plus];
        let report = orthogonality_theorem_check(&g, &programs).unwrap();
        // Same implemented unitary both ways: the overlapping pair is
        // reported but does not violate the theorem.
        assert!(report.passed);
        assert!(!report.pairs[0].distinct);
        assert!(report.pairs[0].overlap > 0.5);
    }

    #[test]
    fn success_statistics_match_quarter() {
        let stats = success_statistics(&gate(GateName::H), &StateVector::basis(1, 0), 5000, 99)
            .unwrap();
        assert_eq!(stats.trials, 5000);
        assert!((stats.p_hat - 0.25).abs() <= 4.0 * stats.std_err);
        let mean = stats.mean_attempts_to_success.unwrap();
        assert!((mean - 4.0).abs() <= 0.4, "mean attempts {mean}");
    }

    #[test]
    fn parallel_statistics_are_bitwise_equal() {
        let u = random_haar_unitary(1, 21);
        let d = random_state(1, 22);
        let serial = success_statistics(&u, &d, 10_000, 1234).unwrap();
        let parallel = success_statistics_parallel(&u, &d, 10_000, 1234).unwrap();
        assert_eq!(serial, parallel);
    }

    #[test]
    fn single_trial_is_repeatable() {
        let u = gate(GateName::H);
        let d = StateVector::basis(1, 0);
        let a = success_statistics(&u, &d, 1, 7).unwrap();
        let b = success_statistics(&u, &d, 1, 7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn mean_attempts_counts_completed_streaks() {
        // flags F F S F S F: two successes, streaks of 3 and 2 attempts.
        let flags = [false, false, true, false, true, false];
        let stats = stats_from_flags(&flags, 0);
        assert_eq!(stats.successes, 2);
        assert!((stats.mean_attempts_to_success.unwrap() - 2.5).abs() <= 1e-12);
        let none = stats_from_flags(&[false, false], 0);
        assert_eq!(none.mean_attempts_to_success, None);
    }

    #[test]
    fn overlap_of_identity_and_hadamard_vanishes() {
        // tr(H) = (1 − 1)/√2 = 0, and the encoded program states agree.
        let by_trace = program_overlap(&gate(GateName::I), &gate(GateName::H)).unwrap();
        assert!(by_trace.norm() <= TOL_ALG);
        let p_i = encode_program(&gate(GateName::I)).unwrap();
        let p_h = encode_program(&gate(GateName::H)).unwrap();
        let by_states = p_i.state().inner_product(p_h.state()).unwrap();
        assert!(by_states.norm() <= TOL_ALG);
    }

    #[test]
    fn overlap_matches_state_inner_product_on_random_pairs() {
        for k in 0..20u64 {
            let m = 1 + (k % 2) as usize;
            let u = random_haar_unitary(m, 800 + 2 * k);
            let v = random_haar_unitary(m, 801 + 2 * k);
            let by_trace = program_overlap(&u, &v).unwrap();
            let by_states = encode_program(&u)
                .unwrap()
                .state()
                .inner_product(encode_program(&v).unwrap().state())
                .unwrap();
            assert!(
                (by_trace - by_states).norm() <= TOL_ALG,
                "pair {k}: {by_trace} vs {by_states}"
            );
        }
    }

    #[test]
    fn all_suites_pass() {
        for name in [
            "orthogonality",
            "identity",
            "independence",
            "overlap",
            "residuals",
        ] {
            let report = run_suite(name, 2024).unwrap();
            assert!(
                report.passed,
                "suite {name}: max violation {}",
                report.max_violation
            );
            assert!(!report.checks.is_empty());
        }
        assert!(matches!(run_suite("bogus", 0), Err(Error::Parse(_))));
    }

    #[test]
    fn certification_composes_with_postselect() {
        // The probabilistic array's claim and the extraction agree: running
        // postselect and applying the certified unitary of U⊗I coincide.
        let u = random_haar_unitary(1, 23);
        let d = random_state(1, 24);
        let (_, out) = postselect(&u, &d).unwrap();
        let g = u.tensor(&Operator::identity(1));
        let cert = extract_implemented_unitary(&g, &StateVector::basis(1, 0)).unwrap();
        let via_cert = cert.unitary.unwrap().apply(&d, &[0]).unwrap();
        assert!(
            out.equal_up_to_global_phase(&via_cert, TOL_CERT).unwrap(),
            "postselect and certificate disagree"
        );
    }
}
