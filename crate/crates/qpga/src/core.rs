//! Dense complex linear algebra over qubit registers.
//!
//! States, operators, density matrices and channels are stored exactly as
//! dense arrays of `Complex64` amplitudes or entries. Everything here is
//! immutable after construction and all operations are pure functions, so
//! values can be shared freely across threads.
//!
//! # Index convention
//!
//! Qubit 0 is the **most significant bit** of the amplitude index: for an
//! n-qubit register, basis state |q₀q₁…q₍ₙ₋₁₎⟩ lives at index
//! q₀·2ⁿ⁻¹ + q₁·2ⁿ⁻² + … + q₍ₙ₋₁₎. Consequently `a.tensor(&b)` places `a`
//! on the high-order bits, so composing registers is index concatenation.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Tolerance for algebraic identities (unitarity, Hermiticity, completeness).
pub const TOL_ALG: f64 = 1e-10;
/// Tolerance for state-vector norms.
pub const TOL_NORM: f64 = 1e-9;
/// Tolerance for implementation certificates, which compound several
/// extraction steps and need looser slack than raw algebra.
pub const TOL_CERT: f64 = 1e-8;

pub(crate) fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn all_finite<'a, I: IntoIterator<Item = &'a Complex64>>(entries: I) -> bool {
    entries
        .into_iter()
        .all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Checks that `targets` are distinct, in range, and `count` of them.
fn validate_targets(targets: &[usize], num_qubits: usize, count: usize) -> Result<()> {
    if targets.len() != count {
        return Err(Error::DimensionMismatch {
            expected: count,
            actual: targets.len(),
        });
    }
    let mut seen = vec![false; num_qubits];
    for &t in targets {
        if t >= num_qubits {
            return Err(Error::QubitOutOfRange {
                index: t,
                num_qubits,
            });
        }
        if seen[t] {
            return Err(Error::DuplicateTarget { index: t });
        }
        seen[t] = true;
    }
    Ok(())
}

/// Inserts the bits of `local` (ordered per `bit_positions`) into `base`.
///
/// `bit_positions[j]` is the bit position (0 = least significant) that
/// receives bit j of `local`, where bit 0 of `local` is its most significant
/// bit for a `bit_positions.len()`-bit value.
fn scatter(base: usize, local: usize, bit_positions: &[usize]) -> usize {
    let k = bit_positions.len();
    let mut idx = base;
    for (j, &pos) in bit_positions.iter().enumerate() {
        if (local >> (k - 1 - j)) & 1 == 1 {
            idx |= 1 << pos;
        }
    }
    idx
}

/// A pure state of an n-qubit register: 2ⁿ complex amplitudes, unit norm.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: DVector<Complex64>,
}

impl StateVector {
    /// Builds a state from raw amplitudes, validating length, finiteness and
    /// normalization (within [`TOL_NORM`]).
    pub fn new(num_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if num_qubits == 0 {
            return Err(Error::QubitOutOfRange {
                index: 0,
                num_qubits: 0,
            });
        }
        let dim = 1usize << num_qubits;
        if amplitudes.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: amplitudes.len(),
            });
        }
        if !all_finite(&amplitudes) {
            return Err(Error::NonFinite);
        }
        let amps = DVector::from_vec(amplitudes);
        let norm = amps.norm();
        if (norm - 1.0).abs() > TOL_NORM {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { num_qubits, amps })
    }

    /// Computational basis state |index⟩.
    pub fn basis(num_qubits: usize, index: usize) -> Self {
        assert!(num_qubits >= 1, "register needs at least one qubit");
        let dim = 1usize << num_qubits;
        assert!(index < dim, "basis index {index} out of range");
        let mut amps = DVector::from_element(dim, c(0.0, 0.0));
        amps[index] = c(1.0, 0.0);
        Self { num_qubits, amps }
    }

    /// Internal constructor for amplitudes produced by our own linear maps.
    /// The result of a non-unitary map (e.g. a projector) is allowed to have
    /// norm below one; callers renormalize where the contract requires it.
    pub(crate) fn from_dvector(num_qubits: usize, amps: DVector<Complex64>) -> Self {
        debug_assert_eq!(amps.len(), 1usize << num_qubits);
        Self { num_qubits, amps }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        self.amps.as_slice()
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amps[index]
    }

    pub(crate) fn vector(&self) -> &DVector<Complex64> {
        &self.amps
    }

    /// Euclidean norm √(Σ|aᵢ|²); 1 for any validly constructed state.
    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    /// Kronecker product; `self` becomes the high-order (most significant)
    /// qubits of the combined register.
    pub fn tensor(&self, other: &StateVector) -> StateVector {
        StateVector::from_dvector(
            self.num_qubits + other.num_qubits,
            DVector::from_column_slice(self.amps.kronecker(&other.amps).as_slice()),
        )
    }

    /// ⟨self|other⟩ with conjugation on `self`.
    pub fn inner_product(&self, other: &StateVector) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        Ok(self.amps.dotc(&other.amps))
    }

    /// True iff the two states agree up to a global phase: |⟨a|b⟩| ≥ 1 − tol.
    pub fn equal_up_to_global_phase(&self, other: &StateVector, tol: f64) -> Result<bool> {
        Ok(self.inner_product(other)?.norm() >= 1.0 - tol)
    }

    /// Contracts ⟨known| against the listed qubits of `self`, returning the
    /// state of the remaining qubits (kept in their original order).
    ///
    /// This recovers the other factor of a product state: if
    /// self = φ ⊗ known (up to qubit placement), the result is φ. The
    /// contraction must account for the full norm within [`TOL_NORM`];
    /// anything less means `self` does not factor through `known` and is
    /// reported as a normalization error.
    pub fn factor_out(&self, known: &StateVector, qubits: &[usize]) -> Result<StateVector> {
        let n = self.num_qubits;
        let k = known.num_qubits;
        validate_targets(qubits, n, k)?;
        if k >= n {
            return Err(Error::DimensionMismatch {
                expected: n - 1,
                actual: k,
            });
        }
        let rem = n - k;
        let known_bits: Vec<usize> = qubits.iter().map(|&q| n - 1 - q).collect();
        let rem_bits: Vec<usize> = (0..n)
            .filter(|q| !qubits.contains(q))
            .map(|q| n - 1 - q)
            .collect();
        let mut out = DVector::from_element(1 << rem, c(0.0, 0.0));
        for a in 0..1usize << rem {
            let base = scatter(0, a, &rem_bits);
            let mut acc = c(0.0, 0.0);
            for b in 0..1usize << k {
                acc += known.amps[b].conj() * self.amps[scatter(base, b, &known_bits)];
            }
            out[a] = acc;
        }
        let norm = out.norm();
        if (norm - 1.0).abs() > TOL_NORM {
            return Err(Error::NotNormalized { norm });
        }
        Ok(StateVector::from_dvector(rem, out / c(norm, 0.0)))
    }

    /// The pure density matrix |self⟩⟨self|.
    pub fn density(&self) -> DensityMatrix {
        DensityMatrix {
            num_qubits: self.num_qubits,
            mat: &self.amps * self.amps.adjoint(),
        }
    }
}

/// A dense 2ⁿ×2ⁿ complex matrix acting on an n-qubit register.
///
/// Unitarity is checked where a contract needs it, never assumed.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    num_qubits: usize,
    mat: DMatrix<Complex64>,
}

impl Operator {
    /// Builds an operator from a square matrix of dimension 2ⁿ.
    pub fn new(num_qubits: usize, mat: DMatrix<Complex64>) -> Result<Self> {
        if num_qubits == 0 {
            return Err(Error::QubitOutOfRange {
                index: 0,
                num_qubits: 0,
            });
        }
        let dim = 1usize << num_qubits;
        if mat.nrows() != dim || mat.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: mat.nrows().max(mat.ncols()),
            });
        }
        if !all_finite(mat.iter()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { num_qubits, mat })
    }

    /// Builds an operator from entries listed row by row.
    pub fn from_rows(num_qubits: usize, rows: &[Complex64]) -> Result<Self> {
        let dim = 1usize << num_qubits;
        if rows.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                actual: rows.len(),
            });
        }
        Self::new(num_qubits, DMatrix::from_row_slice(dim, dim, rows))
    }

    pub fn identity(num_qubits: usize) -> Self {
        let dim = 1usize << num_qubits;
        Self {
            num_qubits,
            mat: DMatrix::identity(dim, dim),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.mat[(row, col)]
    }

    /// Kronecker product; `self` acts on the high-order qubits.
    pub fn tensor(&self, other: &Operator) -> Operator {
        Operator {
            num_qubits: self.num_qubits + other.num_qubits,
            mat: self.mat.kronecker(&other.mat),
        }
    }

    /// Matrix product `self · other` (apply `other` first).
    pub fn compose(&self, other: &Operator) -> Result<Operator> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        Ok(Operator {
            num_qubits: self.num_qubits,
            mat: &self.mat * &other.mat,
        })
    }

    pub fn adjoint(&self) -> Operator {
        Operator {
            num_qubits: self.num_qubits,
            mat: self.mat.adjoint(),
        }
    }

    pub fn scale(&self, factor: Complex64) -> Operator {
        Operator {
            num_qubits: self.num_qubits,
            mat: &self.mat * factor,
        }
    }

    /// Largest entry deviation of U†U from the identity.
    pub fn unitarity_deviation(&self) -> f64 {
        let dim = self.dim();
        let gram = self.mat.adjoint() * &self.mat;
        let mut dev = 0.0f64;
        for r in 0..dim {
            for col in 0..dim {
                let expect = if r == col { 1.0 } else { 0.0 };
                dev = dev.max((gram[(r, col)] - c(expect, 0.0)).norm());
            }
        }
        dev
    }

    /// True iff U†U deviates from the identity by at most `tol` entrywise.
    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_deviation() <= tol
    }

    pub(crate) fn require_unitary(&self, tol: f64) -> Result<()> {
        let deviation = self.unitarity_deviation();
        if deviation > tol {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(())
    }

    /// True iff `other` = e^{iθ}·self entrywise within `tol`, with θ fixed by
    /// the largest-magnitude entry of `self`.
    pub fn equal_up_to_global_phase(&self, other: &Operator, tol: f64) -> Result<bool> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        let peak = |m: &DMatrix<Complex64>| -> (usize, usize, f64) {
            let mut best = (0, 0, 0.0f64);
            for r in 0..m.nrows() {
                for col in 0..m.ncols() {
                    let mag = m[(r, col)].norm();
                    if mag > best.2 {
                        best = (r, col, mag);
                    }
                }
            }
            best
        };
        let (r, col, mag_a) = peak(&self.mat);
        if mag_a <= tol {
            return Err(Error::ZeroInput);
        }
        if peak(&other.mat).2 <= tol {
            return Err(Error::ZeroInput);
        }
        let b_entry = other.mat[(r, col)];
        if b_entry.norm() <= tol {
            return Ok(false);
        }
        let phase = b_entry / b_entry.norm() * self.mat[(r, col)].conj()
            / self.mat[(r, col)].norm();
        let mut dev = 0.0f64;
        for rr in 0..self.dim() {
            for cc in 0..self.dim() {
                dev = dev.max((other.mat[(rr, cc)] - phase * self.mat[(rr, cc)]).norm());
            }
        }
        Ok(dev <= tol)
    }

    /// Applies the operator to the listed qubits of `state`, identity on the
    /// rest. `targets[0]` is the most significant qubit of the operator's own
    /// index space. The output is normalized (within [`TOL_NORM`]) whenever
    /// the operator is unitary; projectors and other non-unitary maps yield
    /// the raw linear image.
    pub fn apply(&self, state: &StateVector, targets: &[usize]) -> Result<StateVector> {
        let n = state.num_qubits;
        let k = self.num_qubits;
        validate_targets(targets, n, k)?;
        let target_bits: Vec<usize> = targets.iter().map(|&t| n - 1 - t).collect();
        let free_bits: Vec<usize> = (0..n)
            .filter(|q| !targets.contains(q))
            .map(|q| n - 1 - q)
            .collect();
        let local_dim = 1usize << k;
        let mut out = DVector::from_element(state.dim(), c(0.0, 0.0));
        for f in 0..1usize << (n - k) {
            let base = scatter(0, f, &free_bits);
            for lo in 0..local_dim {
                let mut acc = c(0.0, 0.0);
                for li in 0..local_dim {
                    acc += self.mat[(lo, li)] * state.amps[scatter(base, li, &target_bits)];
                }
                out[scatter(base, lo, &target_bits)] = acc;
            }
        }
        Ok(StateVector::from_dvector(n, out))
    }

    /// Full application when the operator covers the whole register.
    pub fn apply_full(&self, state: &StateVector) -> Result<StateVector> {
        if self.dim() != state.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: state.dim(),
            });
        }
        Ok(StateVector::from_dvector(
            state.num_qubits,
            &self.mat * &state.amps,
        ))
    }

    /// Expands the operator to the full 2ⁿ×2ⁿ matrix acting on the listed
    /// qubits of an n-qubit register, identity elsewhere.
    pub fn expand(&self, num_qubits: usize, targets: &[usize]) -> Result<Operator> {
        let k = self.num_qubits;
        validate_targets(targets, num_qubits, k)?;
        let target_bits: Vec<usize> = targets.iter().map(|&t| num_qubits - 1 - t).collect();
        let free_bits: Vec<usize> = (0..num_qubits)
            .filter(|q| !targets.contains(q))
            .map(|q| num_qubits - 1 - q)
            .collect();
        let dim = 1usize << num_qubits;
        let local_dim = 1usize << k;
        let mut mat = DMatrix::from_element(dim, dim, c(0.0, 0.0));
        for f in 0..1usize << (num_qubits - k) {
            let base = scatter(0, f, &free_bits);
            for lo in 0..local_dim {
                let row = scatter(base, lo, &target_bits);
                for li in 0..local_dim {
                    mat[(row, scatter(base, li, &target_bits))] = self.mat[(lo, li)];
                }
            }
        }
        Ok(Operator {
            num_qubits,
            mat,
        })
    }

    pub fn determinant(&self) -> Complex64 {
        self.mat.clone().determinant()
    }

    /// tr(self).
    pub fn trace(&self) -> Complex64 {
        self.mat.diagonal().sum()
    }
}

/// Haar-distributed random unitary on `num_qubits` qubits.
///
/// Samples a complex Gaussian matrix, orthonormalizes it by QR, and corrects
/// each column by the phase of the corresponding diagonal entry of R so the
/// distribution is exactly the invariant one. Deterministic for a given seed.
pub fn random_haar_unitary(num_qubits: usize, seed: u64) -> Operator {
    assert!(num_qubits >= 1, "register needs at least one qubit");
    let dim = 1usize << num_qubits;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::with_capacity(dim * dim);
    for _ in 0..dim * dim {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        entries.push(c(re, im) / c(std::f64::consts::SQRT_2, 0.0));
    }
    let gauss = DMatrix::from_row_slice(dim, dim, &entries);
    let qr = gauss.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    Operator {
        num_qubits,
        mat: q,
    }
}

/// Haar-distributed random pure state (normalized complex Gaussian vector).
pub fn random_state(num_qubits: usize, seed: u64) -> StateVector {
    assert!(num_qubits >= 1, "register needs at least one qubit");
    let dim = 1usize << num_qubits;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut amps = DVector::from_element(dim, c(0.0, 0.0));
    for i in 0..dim {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        amps[i] = c(re, im);
    }
    let norm = amps.norm();
    StateVector::from_dvector(num_qubits, amps / c(norm, 0.0))
}

/// A Hermitian, positive semidefinite, trace-one matrix on n qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    num_qubits: usize,
    mat: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace, and positive semidefiniteness
    /// (eigenvalues ≥ −[`TOL_ALG`]).
    pub fn new(num_qubits: usize, mat: DMatrix<Complex64>) -> Result<Self> {
        if num_qubits == 0 {
            return Err(Error::QubitOutOfRange {
                index: 0,
                num_qubits: 0,
            });
        }
        let dim = 1usize << num_qubits;
        if mat.nrows() != dim || mat.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: mat.nrows().max(mat.ncols()),
            });
        }
        if !all_finite(mat.iter()) {
            return Err(Error::NonFinite);
        }
        let herm_dev = (&mat - mat.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0f64, f64::max);
        if herm_dev > TOL_ALG {
            return Err(Error::InvalidDensity {
                reason: format!("not Hermitian (deviation {herm_dev:.3e})"),
            });
        }
        let trace: Complex64 = mat.diagonal().sum();
        if (trace - c(1.0, 0.0)).norm() > TOL_ALG {
            return Err(Error::InvalidDensity {
                reason: format!("trace {} != 1", trace.re),
            });
        }
        // Eigenvalues of the Hermitian part; symmetrizing first keeps the
        // solver on a genuinely Hermitian input.
        let herm = (&mat + mat.adjoint()) * c(0.5, 0.0);
        let min_eig = herm
            .symmetric_eigenvalues()
            .iter()
            .fold(f64::INFINITY, |m, &e| m.min(e));
        if min_eig < -TOL_ALG {
            return Err(Error::InvalidDensity {
                reason: format!("negative eigenvalue {min_eig:.3e}"),
            });
        }
        Ok(Self { num_qubits, mat })
    }

    pub(crate) fn from_matrix_unchecked(num_qubits: usize, mat: DMatrix<Complex64>) -> Self {
        Self { num_qubits, mat }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.mat[(row, col)]
    }

    pub fn trace(&self) -> Complex64 {
        self.mat.diagonal().sum()
    }

    /// tr(ρ²); 1 exactly for pure states, strictly less for mixed ones.
    pub fn purity(&self) -> f64 {
        self.mat.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Kronecker product; `self` occupies the high-order qubits.
    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix {
            num_qubits: self.num_qubits + other.num_qubits,
            mat: self.mat.kronecker(&other.mat),
        }
    }

    /// Traces out every qubit not listed in `keep`. Output qubit j is input
    /// qubit `keep[j]`.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let n = self.num_qubits;
        if keep.is_empty() {
            return Err(Error::EmptyList { what: "keep" });
        }
        validate_targets(keep, n, keep.len())?;
        let k = keep.len();
        if k == n {
            return Ok(self.clone());
        }
        let keep_bits: Vec<usize> = keep.iter().map(|&q| n - 1 - q).collect();
        let traced_bits: Vec<usize> = (0..n)
            .filter(|q| !keep.contains(q))
            .map(|q| n - 1 - q)
            .collect();
        let dim = 1usize << k;
        let mut mat = DMatrix::from_element(dim, dim, c(0.0, 0.0));
        for r in 0..dim {
            let r_base = scatter(0, r, &keep_bits);
            for col in 0..dim {
                let c_base = scatter(0, col, &keep_bits);
                let mut acc = c(0.0, 0.0);
                for t in 0..1usize << (n - k) {
                    acc += self.mat[(
                        scatter(r_base, t, &traced_bits),
                        scatter(c_base, t, &traced_bits),
                    )];
                }
                mat[(r, col)] = acc;
            }
        }
        DensityMatrix::new(k, mat)
    }

    /// Raw conjugation A ρ A† by a full-size matrix; used internally for
    /// Kraus terms and projections, where intermediate results may be
    /// sub-normalized.
    pub(crate) fn conjugate_raw(&self, full: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        full * &self.mat * full.adjoint()
    }
}

/// A quantum channel in Kraus form: ρ ↦ Σₖ Kₖ ρ Kₖ†, with the completeness
/// condition Σₖ Kₖ†Kₖ = I enforced at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    num_qubits: usize,
    ops: Vec<Operator>,
}

impl KrausChannel {
    /// Builds a channel, enforcing completeness at [`TOL_ALG`].
    pub fn new(ops: Vec<Operator>) -> Result<Self> {
        Self::with_tolerance(ops, TOL_ALG)
    }

    /// Builds a channel, enforcing Σ K†K = I within `tol`.
    pub fn with_tolerance(ops: Vec<Operator>, tol: f64) -> Result<Self> {
        let first = ops.first().ok_or(Error::EmptyList { what: "Kraus operator" })?;
        let num_qubits = first.num_qubits();
        let dim = first.dim();
        for op in &ops {
            if op.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: op.dim(),
                });
            }
        }
        let mut sum = DMatrix::from_element(dim, dim, c(0.0, 0.0));
        for op in &ops {
            sum += op.matrix().adjoint() * op.matrix();
        }
        let mut deviation = 0.0f64;
        for r in 0..dim {
            for col in 0..dim {
                let expect = if r == col { 1.0 } else { 0.0 };
                deviation = deviation.max((sum[(r, col)] - c(expect, 0.0)).norm());
            }
        }
        if deviation > tol {
            return Err(Error::IncompleteChannel { deviation });
        }
        Ok(Self { num_qubits, ops })
    }

    /// Channel with the single Kraus element {U}; completeness then reduces
    /// to unitarity of U.
    pub fn from_unitary(u: Operator) -> Result<Self> {
        Self::new(vec![u])
    }

    pub fn identity(num_qubits: usize) -> Self {
        Self {
            num_qubits,
            ops: vec![Operator::identity(num_qubits)],
        }
    }

    /// Single-qubit amplitude damping with decay probability γ:
    /// K₀ = diag(1, √(1−γ)), K₁ = √γ |0⟩⟨1|.
    pub fn amplitude_damping(gamma: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::ParameterOutOfRange {
                name: "gamma",
                value: gamma,
            });
        }
        let zero = c(0.0, 0.0);
        let k0 = Operator::from_rows(
            1,
            &[c(1.0, 0.0), zero, zero, c((1.0 - gamma).sqrt(), 0.0)],
        )?;
        let k1 = Operator::from_rows(1, &[zero, c(gamma.sqrt(), 0.0), zero, zero])?;
        Self::new(vec![k0, k1])
    }

    /// Single-qubit dephasing: applies σz with probability p.
    pub fn dephasing(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::ParameterOutOfRange { name: "p", value: p });
        }
        let zero = c(0.0, 0.0);
        let k0 = Operator::from_rows(
            1,
            &[c((1.0 - p).sqrt(), 0.0), zero, zero, c((1.0 - p).sqrt(), 0.0)],
        )?;
        let k1 = Operator::from_rows(1, &[c(p.sqrt(), 0.0), zero, zero, c(-(p.sqrt()), 0.0)])?;
        Self::new(vec![k0, k1])
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn kraus_ops(&self) -> &[Operator] {
        &self.ops
    }

    /// Applies the channel to the listed qubits of `rho`: Σₖ Kₖ ρ Kₖ† with
    /// each Kₖ expanded by the identity on the remaining qubits.
    pub fn apply(&self, rho: &DensityMatrix, targets: &[usize]) -> Result<DensityMatrix> {
        validate_targets(targets, rho.num_qubits(), self.num_qubits)?;
        let dim = rho.dim();
        let mut acc = DMatrix::from_element(dim, dim, c(0.0, 0.0));
        for op in &self.ops {
            let full = op.expand(rho.num_qubits(), targets)?;
            acc += rho.conjugate_raw(full.matrix());
        }
        DensityMatrix::new(rho.num_qubits(), acc)
    }
}
