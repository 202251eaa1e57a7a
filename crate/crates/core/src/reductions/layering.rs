//! Degree layering: convert a bounded-degree local Hamiltonian H = Σᵢ Hᵢ
//! into two commuting layers on an ancilla-extended register.
//!
//! Each data qubit j gets an l-level ancilla (⌈log₂ l⌉ qubits, l = max
//! per-qubit degree after padding every term to a uniform locality k). Term i
//! becomes Gᵢ = Hᵢ ⊗ Π_t |pₜ(i)−1⟩⟨pₜ(i)−1| where pₜ(i) numbers the terms
//! touching each qubit, so terms sharing a qubit pick orthogonal ancilla
//! levels and commute. A penalty R_j = I − |γ⟩⟨γ| with |γ⟩ uniform over the
//! l levels keeps low-energy states honest; R = m^r Σ_j R_j with r = b + 5.
//! The returned sides are A = Σ Gᵢ / (n·m^r) and B = Σ R_j / n, so
//! G + R = scale · (A + B) with scale = n·m^r.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hamiltonian::{LayeredHamiltonian, LocalTerm, TwoLayerInstance};
use crate::state::{OperatorFactor, StateVector};

/// Largest encodable per-qubit degree (ancilla dimension cap).
pub const DEGREE_CAP: usize = 8;

#[derive(Debug, Clone)]
pub struct TermAssignment {
    /// Padded support: exactly `locality` data qubits per term.
    pub support: Vec<usize>,
    /// Ancilla level pₜ(i) − 1 pinned on each support qubit's ancilla.
    pub levels: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct LayeredReduction {
    a: LayeredHamiltonian,
    b: LayeredHamiltonian,
    /// YES-side threshold (c/κ)/(n·m^r) implied for A + B.
    pub alpha: f64,
    /// NO-side threshold (s/κ − 1/m^{b+1})/(n·m^r) implied for A + B.
    pub beta: f64,
    /// Whether 0 ≤ α < β actually holds at this scale.
    pub thresholds_valid: bool,
    /// Whether the input gap satisfied s − c ≥ m^{−b}.
    pub gap_ok: bool,
    /// Energy division constant κ = l^k.
    pub kappa: f64,
    /// Ancilla dimension l.
    pub degree: usize,
    /// Uniform padded locality k.
    pub locality: usize,
    /// Penalty exponent r = b + 5.
    pub rate: f64,
    /// G + R = scale · (A + B).
    pub scale: f64,
    pub term_count: usize,
    pub data_qubits: usize,
    /// Qubits per ancilla block.
    pub ancilla_width: usize,
    pub assignments: Vec<TermAssignment>,
}

impl LayeredReduction {
    pub fn a(&self) -> &LayeredHamiltonian {
        &self.a
    }

    pub fn b(&self) -> &LayeredHamiltonian {
        &self.b
    }

    pub fn num_qubits(&self) -> usize {
        self.data_qubits + self.data_qubits * self.ancilla_width
    }

    /// Ancilla block (global qubit indices) of data qubit j.
    pub fn ancilla_block(&self, j: usize) -> Vec<usize> {
        let start = self.data_qubits + j * self.ancilla_width;
        (start..start + self.ancilla_width).collect()
    }

    /// The uniform ancilla level state |γ⟩ on one block.
    pub fn gamma_block(&self) -> StateVector {
        let dim = 1usize << self.ancilla_width;
        let mut amps = vec![Complex64::ZERO; dim];
        let w = 1.0 / (self.degree as f64).sqrt();
        for a in amps.iter_mut().take(self.degree) {
            *a = Complex64::new(w, 0.0);
        }
        StateVector::from_amplitudes(self.ancilla_width, amps).expect("block state")
    }

    /// ψ ⊗ |γ⟩^⊗n on the extended register.
    pub fn extend(&self, psi: &StateVector) -> Result<StateVector> {
        if psi.num_qubits() != self.data_qubits {
            return Err(Error::SizeMismatch { expected: self.data_qubits, got: psi.num_qubits() });
        }
        let gamma = self.gamma_block();
        let mut out = psi.clone();
        for _ in 0..self.data_qubits {
            out = out.tensor(&gamma)?;
        }
        Ok(out)
    }

    /// ⟨φ|(G + R)|φ⟩ on the extended register.
    pub fn g_plus_r_energy(&self, phi: &StateVector) -> Result<f64> {
        Ok(self.scale * (self.a.energy(phi)? + self.b.energy(phi)?))
    }

    /// The two-layer instance, if the implied thresholds are ordered.
    pub fn instance(&self) -> Result<TwoLayerInstance> {
        TwoLayerInstance::new(self.a.clone(), self.b.clone(), self.alpha, self.beta)
    }
}

/// Compile H into the two commuting layers described at module level.
///
/// `b` controls the penalty exponent; `c` and `s` are the YES/NO energy
/// thresholds claimed for H and are only used to derive the implied
/// thresholds of the output.
pub fn reduce_to_two_layers(
    h: &LayeredHamiltonian,
    b: f64,
    c: f64,
    s: f64,
) -> Result<LayeredReduction> {
    let b_positive = b > 0.0;
    if !b_positive {
        return Err(Error::ParamRange(format!("penalty exponent b must be positive, got {b}")));
    }
    if !(c >= 0.0 && s >= c) {
        return Err(Error::ParamRange(format!("need 0 ≤ c ≤ s, got c = {c}, s = {s}")));
    }
    let n = h.num_qubits();
    let terms: Vec<&LocalTerm> = h.terms().collect();
    let m = terms.len();
    if m == 0 {
        return Err(Error::ParamRange("cannot layer an empty Hamiltonian".into()));
    }
    h.validate_terms()?;

    // Uniform locality: pad every support to k qubits, spreading the padding
    // over the least-loaded qubits so the degree stays as small as possible.
    let supports: Vec<Vec<usize>> = terms.iter().map(|t| t.support()).collect();
    let k = supports.iter().map(|s| s.len()).max().unwrap_or(1).max(1);
    if k > n {
        return Err(Error::InvalidSupport(format!(
            "term locality {k} exceeds register size {n}"
        )));
    }
    let mut counts = vec![0usize; n];
    for s in &supports {
        for &q in s {
            counts[q] += 1;
        }
    }
    let mut padded: Vec<Vec<usize>> = Vec::with_capacity(m);
    for s in &supports {
        let mut sup = s.clone();
        while sup.len() < k {
            let q = (0..n)
                .filter(|q| !sup.contains(q))
                .min_by_key(|&q| (counts[q], q))
                .expect("k ≤ n leaves a candidate");
            counts[q] += 1;
            sup.push(q);
        }
        sup.sort_unstable();
        padded.push(sup);
    }
    let degree = counts.iter().copied().max().unwrap_or(1).max(2);
    if degree > DEGREE_CAP {
        return Err(Error::DegreeCap { degree, cap: DEGREE_CAP });
    }

    // Ancilla geometry.
    let width = usize::BITS as usize - (degree - 1).leading_zeros() as usize;
    let total = n + n * width;
    let rate = b + 5.0;
    let m_f = m as f64;
    let kappa = (degree as f64).powi(k as i32);
    let scale = n as f64 * m_f.powf(rate);

    // Level assignment: the i-th term touching qubit j pins level i − 1.
    let mut next_level = vec![0usize; n];
    let mut assignments: Vec<TermAssignment> = Vec::with_capacity(m);
    for sup in &padded {
        let levels: Vec<usize> = sup
            .iter()
            .map(|&q| {
                let l = next_level[q];
                next_level[q] += 1;
                l
            })
            .collect();
        assignments.push(TermAssignment { support: sup.clone(), levels });
    }

    // A-side: Hᵢ ⊗ ancilla level projectors, scaled by 1/(n·m^r).
    let mut a_terms: Vec<LocalTerm> = Vec::with_capacity(m);
    for (term, assign) in terms.iter().zip(&assignments) {
        let mut factors: Vec<OperatorFactor> = term.factors().to_vec();
        for (&q, &level) in assign.support.iter().zip(&assign.levels) {
            let block: Vec<usize> = (n + q * width..n + (q + 1) * width).collect();
            factors.push(OperatorFactor::basis_projector(block, level)?);
        }
        a_terms.push(LocalTerm::new(term.coefficient() / scale, factors)?);
    }
    let a = LayeredHamiltonian::commuting(total, a_terms)?;

    // B-side: (I − |γ⟩⟨γ|)/n on each ancilla block.
    let gamma: Vec<Complex64> = {
        let dim = 1usize << width;
        let w = 1.0 / (degree as f64).sqrt();
        (0..dim)
            .map(|i| if i < degree { Complex64::new(w, 0.0) } else { Complex64::ZERO })
            .collect()
    };
    let mut b_terms: Vec<LocalTerm> = Vec::with_capacity(n);
    for j in 0..n {
        let block: Vec<usize> = (n + j * width..n + (j + 1) * width).collect();
        let proj = OperatorFactor::rank1_projector(block.clone(), &gamma)?;
        let dim = 1usize << width;
        let mut mat = crate::linalg::identity(dim);
        mat -= proj.matrix();
        b_terms.push(LocalTerm::new(1.0 / n as f64, vec![OperatorFactor::new(block, mat)?])?);
    }
    let b_side = LayeredHamiltonian::commuting(total, b_terms)?;

    let alpha = (c / kappa) / scale;
    let beta = (s / kappa - m_f.powf(-(b + 1.0))) / scale;
    let thresholds_valid = alpha >= 0.0 && beta > alpha;
    let gap_ok = s - c >= m_f.powf(-b);

    Ok(LayeredReduction {
        a,
        b: b_side,
        alpha,
        beta,
        thresholds_valid,
        gap_ok,
        kappa,
        degree,
        locality: k,
        rate,
        scale,
        term_count: m,
        data_qubits: n,
        ancilla_width: width,
        assignments,
    })
}
