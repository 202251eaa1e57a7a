//! Dense state vectors over qubit registers and operators supported on small
//! qubit subsets.
//!
//! Qubit 0 is the least-significant bit of every amplitude index. All other
//! modules inherit this convention.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};

/// Largest register a dense state vector will allocate.
pub const QUBIT_CAP: usize = 24;
/// Largest support a single dense operator factor may have.
pub const FACTOR_SUPPORT_CAP: usize = 6;
/// Tolerance for the Hermitian / unitary / projector classification flags.
pub const MATRIX_FLAG_TOL: f64 = 1e-12;

/// Dense state vector on `num_qubits` qubits.
#[derive(Debug, Clone)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<Complex64>,
    normalized: bool,
}

impl StateVector {
    /// |0…0⟩ on an `n`-qubit register.
    pub fn zero(n: usize) -> Result<Self> {
        if n == 0 || n > QUBIT_CAP {
            return Err(Error::RegisterSize { got: n, cap: QUBIT_CAP });
        }
        let mut amps = vec![Complex64::ZERO; 1usize << n];
        amps[0] = Complex64::ONE;
        Ok(StateVector { num_qubits: n, amps, normalized: true })
    }

    /// Computational basis state |index⟩.
    pub fn basis(n: usize, index: usize) -> Result<Self> {
        let mut s = Self::zero(n)?;
        if index >= s.amps.len() {
            return Err(Error::InvalidSupport(format!(
                "basis index {index} outside {n}-qubit register"
            )));
        }
        s.amps[0] = Complex64::ZERO;
        s.amps[index] = Complex64::ONE;
        Ok(s)
    }

    /// Wrap raw amplitudes; the normalization flag is set from the data.
    pub fn from_amplitudes(n: usize, amps: Vec<Complex64>) -> Result<Self> {
        if n == 0 || n > QUBIT_CAP {
            return Err(Error::RegisterSize { got: n, cap: QUBIT_CAP });
        }
        if amps.len() != 1usize << n {
            return Err(Error::SizeMismatch { expected: 1usize << n, got: amps.len() });
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let normalized = (norm - 1.0).abs() <= MATRIX_FLAG_TOL;
        Ok(StateVector { num_qubits: n, amps, normalized })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Whether the vector is unit-norm as far as the type has tracked it.
    /// Non-unitary operator applications clear this flag.
    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Rescale to unit norm. Errors on the zero vector.
    pub fn normalize(mut self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::ParamRange("cannot normalize the zero vector".into()));
        }
        for a in &mut self.amps {
            *a /= n;
        }
        self.normalized = true;
        Ok(self)
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::SizeMismatch { expected: self.num_qubits, got: other.num_qubits });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// L2 distance ‖self − other‖.
    pub fn distance(&self, other: &StateVector) -> Result<f64> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::SizeMismatch { expected: self.num_qubits, got: other.num_qubits });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    /// Tensor product with `other` appended on the high bits.
    pub fn tensor(&self, other: &StateVector) -> Result<Self> {
        let n = self.num_qubits + other.num_qubits;
        if n > QUBIT_CAP {
            return Err(Error::RegisterSize { got: n, cap: QUBIT_CAP });
        }
        let mut amps = vec![Complex64::ZERO; 1usize << n];
        let lo = self.dim();
        for (j, b) in other.amps.iter().enumerate() {
            if *b == Complex64::ZERO {
                continue;
            }
            for (i, a) in self.amps.iter().enumerate() {
                amps[j * lo + i] = a * b;
            }
        }
        Ok(StateVector {
            num_qubits: n,
            amps,
            normalized: self.normalized && other.normalized,
        })
    }

    /// Apply an operator factor embedded with identities elsewhere.
    pub fn apply_factor(&self, f: &OperatorFactor) -> Result<Self> {
        f.validate_in_register(self.num_qubits)?;
        let amps = apply_matrix_on(&self.amps, self.num_qubits, f.support(), f.matrix());
        Ok(StateVector {
            num_qubits: self.num_qubits,
            amps,
            normalized: self.normalized && f.is_unitary(),
        })
    }

    /// In-place accumulate `other * scale`.
    pub(crate) fn axpy(&mut self, scale: Complex64, other: &StateVector) {
        for (a, b) in self.amps.iter_mut().zip(&other.amps) {
            *a += scale * b;
        }
        self.normalized = false;
    }

    pub(crate) fn scale(&mut self, s: Complex64) {
        for a in &mut self.amps {
            *a *= s;
        }
        self.normalized = false;
    }

    pub(crate) fn zero_like(&self) -> Self {
        StateVector {
            num_qubits: self.num_qubits,
            amps: vec![Complex64::ZERO; self.amps.len()],
            normalized: false,
        }
    }

    /// Relabel qubits: amplitude of basis state b moves to the index whose
    /// bit `perm[q]` equals bit `q` of b.
    pub fn permute_qubits(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.num_qubits {
            return Err(Error::SizeMismatch { expected: self.num_qubits, got: perm.len() });
        }
        let mut seen = vec![false; self.num_qubits];
        for &p in perm {
            if p >= self.num_qubits || seen[p] {
                return Err(Error::InvalidSupport("permutation is not a bijection".into()));
            }
            seen[p] = true;
        }
        let mut out = vec![Complex64::ZERO; self.amps.len()];
        for (i, a) in self.amps.iter().enumerate() {
            if *a == Complex64::ZERO {
                continue;
            }
            let mut j = 0usize;
            for (q, &p) in perm.iter().enumerate() {
                j |= ((i >> q) & 1) << p;
            }
            out[j] = *a;
        }
        Ok(StateVector {
            num_qubits: self.num_qubits,
            amps: out,
            normalized: self.normalized,
        })
    }
}

/// Place a state on `qubits` of a larger `n`-qubit register, |0⟩ elsewhere.
pub fn embed_on_qubits(n: usize, qubits: &[usize], small: &StateVector) -> Result<StateVector> {
    if qubits.len() != small.num_qubits() {
        return Err(Error::SizeMismatch { expected: qubits.len(), got: small.num_qubits() });
    }
    check_support(qubits, n, qubits.len().max(1))?;
    let mut amps = vec![Complex64::ZERO; 1usize << n];
    for (l, a) in small.amplitudes().iter().enumerate() {
        if *a == Complex64::ZERO {
            continue;
        }
        let mut idx = 0usize;
        for (t, &q) in qubits.iter().enumerate() {
            idx |= ((l >> t) & 1) << q;
        }
        amps[idx] = *a;
    }
    Ok(StateVector {
        num_qubits: n,
        amps,
        normalized: small.is_normalized(),
    })
}

/// Dense operator on a small, sorted set of qubits.
#[derive(Debug, Clone)]
pub struct OperatorFactor {
    support: Vec<usize>,
    matrix: CMat,
    hermitian: bool,
    unitary: bool,
}

impl OperatorFactor {
    /// Build a factor from a sorted list of distinct qubits and a matching
    /// dense matrix. Hermitian/unitary flags are detected numerically.
    pub fn new(support: Vec<usize>, matrix: CMat) -> Result<Self> {
        if support.is_empty() || support.len() > FACTOR_SUPPORT_CAP {
            return Err(Error::CapExceeded {
                what: "factor support",
                got: support.len(),
                cap: FACTOR_SUPPORT_CAP,
            });
        }
        if support.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSupport(
                "support must be strictly increasing".into(),
            ));
        }
        let dim = 1usize << support.len();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::SizeMismatch { expected: dim, got: matrix.nrows() });
        }
        let hermitian = linalg::hermiticity_error(&matrix) <= MATRIX_FLAG_TOL;
        let unitary = linalg::unitarity_error(&matrix) <= MATRIX_FLAG_TOL;
        Ok(OperatorFactor { support, matrix, hermitian, unitary })
    }

    pub fn identity(support: Vec<usize>) -> Result<Self> {
        let dim = 1usize << support.len();
        Self::new(support, linalg::identity(dim))
    }

    /// |index⟩⟨index| on the support.
    pub fn basis_projector(support: Vec<usize>, index: usize) -> Result<Self> {
        let dim = 1usize << support.len();
        if index >= dim {
            return Err(Error::InvalidSupport(format!(
                "basis index {index} outside dimension {dim}"
            )));
        }
        let mut m = CMat::zeros(dim, dim);
        m[(index, index)] = Complex64::ONE;
        Self::new(support, m)
    }

    /// |v⟩⟨v| for a (normalized) vector on the support.
    pub fn rank1_projector(support: Vec<usize>, v: &[Complex64]) -> Result<Self> {
        let dim = 1usize << support.len();
        if v.len() != dim {
            return Err(Error::SizeMismatch { expected: dim, got: v.len() });
        }
        let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::ParamRange("projector onto the zero vector".into()));
        }
        let mut m = CMat::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = v[i] * v[j].conj() / (norm * norm);
            }
        }
        Self::new(support, m)
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn is_unitary(&self) -> bool {
        self.unitary
    }

    pub fn op_norm(&self) -> f64 {
        linalg::op_norm(&self.matrix)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::min_eig_hermitian(&self.matrix)
    }

    /// True when the factor is the identity within `tol` (Frobenius).
    pub fn is_identity(&self, tol: f64) -> bool {
        (&self.matrix - linalg::identity(self.matrix.nrows())).norm() <= tol
    }

    pub fn dagger(&self) -> Self {
        OperatorFactor {
            support: self.support.clone(),
            matrix: self.matrix.adjoint(),
            hermitian: self.hermitian,
            unitary: self.unitary,
        }
    }

    pub fn validate_in_register(&self, num_qubits: usize) -> Result<()> {
        check_support(&self.support, num_qubits, FACTOR_SUPPORT_CAP)
    }
}

pub(crate) fn check_support(support: &[usize], num_qubits: usize, cap: usize) -> Result<()> {
    if support.len() > cap {
        return Err(Error::CapExceeded { what: "operator support", got: support.len(), cap });
    }
    for &q in support {
        if q >= num_qubits {
            return Err(Error::SupportOutOfRange { qubit: q, num_qubits });
        }
    }
    Ok(())
}

/// Apply a dense matrix on `positions` (any order, distinct) of an `n`-qubit
/// register. Bit t of the matrix's index corresponds to `positions[t]`.
pub(crate) fn apply_matrix_on(
    amps: &[Complex64],
    n: usize,
    positions: &[usize],
    m: &CMat,
) -> Vec<Complex64> {
    let k = positions.len();
    let local_dim = 1usize << k;
    debug_assert_eq!(m.nrows(), local_dim);

    // Global offset of each local basis index.
    let mut offsets = vec![0usize; local_dim];
    for (l, off) in offsets.iter_mut().enumerate() {
        for (t, &p) in positions.iter().enumerate() {
            *off |= ((l >> t) & 1) << p;
        }
    }

    let mut sorted = positions.to_vec();
    sorted.sort_unstable();

    let mut out = vec![Complex64::ZERO; amps.len()];
    let mut x = vec![Complex64::ZERO; local_dim];
    for r in 0..(1usize << (n - k)) {
        // Insert zero bits at the (sorted) support positions.
        let mut base = r;
        for &p in &sorted {
            let low = base & ((1usize << p) - 1);
            base = ((base >> p) << (p + 1)) | low;
        }
        for l in 0..local_dim {
            x[l] = amps[base + offsets[l]];
        }
        for (row, slot) in offsets.iter().enumerate() {
            let mut acc = Complex64::ZERO;
            for (col, xv) in x.iter().enumerate() {
                let mv = m[(row, col)];
                if mv != Complex64::ZERO {
                    acc += mv * xv;
                }
            }
            out[base + slot] = acc;
        }
    }
    out
}

/// Trace of |phi⟩⟨psi| over the complement of `keep`, as a dense matrix of
/// dimension 2^|keep|. Bit t of the matrix index corresponds to `keep[t]`
/// (any order, distinct).
pub fn partial_trace_outer(
    psi: &StateVector,
    phi: &StateVector,
    keep: &[usize],
) -> Result<CMat> {
    if psi.num_qubits() != phi.num_qubits() {
        return Err(Error::SizeMismatch { expected: psi.num_qubits(), got: phi.num_qubits() });
    }
    let n = psi.num_qubits();
    check_support(keep, n, FACTOR_SUPPORT_CAP)?;
    let mut sorted = keep.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidSupport("keep set has duplicate qubits".into()));
    }
    let k = keep.len();
    let local_dim = 1usize << k;
    let mut offsets = vec![0usize; local_dim];
    for (l, off) in offsets.iter_mut().enumerate() {
        for (t, &p) in keep.iter().enumerate() {
            *off |= ((l >> t) & 1) << p;
        }
    }
    let mut m = CMat::zeros(local_dim, local_dim);
    for r in 0..(1usize << (n - k)) {
        let mut base = r;
        for &p in &sorted {
            let low = base & ((1usize << p) - 1);
            base = ((base >> p) << (p + 1)) | low;
        }
        for x in 0..local_dim {
            let pa = phi.amps[base + offsets[x]];
            if pa == Complex64::ZERO {
                continue;
            }
            for y in 0..local_dim {
                m[(x, y)] += pa * psi.amps[base + offsets[y]].conj();
            }
        }
    }
    Ok(m)
}

/// Densify a sequence of (positions, matrix) applications on a register made
/// of `region` (sorted global qubits). Operators are applied left to right,
/// so the result is ops[last] ⋯ ops[0] as a matrix.
pub(crate) fn dense_on_region(region: &[usize], ops: &[(&[usize], &CMat)]) -> Result<CMat> {
    let k = region.len();
    if k > 14 {
        return Err(Error::CapExceeded { what: "dense region", got: k, cap: 14 });
    }
    let local_of = |q: usize| -> Result<usize> {
        region
            .iter()
            .position(|&r| r == q)
            .ok_or_else(|| Error::InvalidSupport(format!("qubit {q} outside dense region")))
    };
    let dim = 1usize << k;
    let mut out = CMat::zeros(dim, dim);
    let mut col = vec![Complex64::ZERO; dim];
    for j in 0..dim {
        col.iter_mut().for_each(|c| *c = Complex64::ZERO);
        col[j] = Complex64::ONE;
        let mut cur = col.clone();
        for (positions, m) in ops {
            let local: Vec<usize> = positions
                .iter()
                .map(|&q| local_of(q))
                .collect::<Result<_>>()?;
            cur = apply_matrix_on(&cur, k, &local, m);
        }
        for i in 0..dim {
            out[(i, j)] = cur[i];
        }
    }
    Ok(out)
}
