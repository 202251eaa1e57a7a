//! Randomized instance and path generators for stress suites.
//!
//! Everything is seeded through [`crate::rng::stream`]; the acceptance and
//! falsification suites lean on these to produce commuting layers with known
//! ground states, certified NO instances, and traversal paths of varying
//! quality.

use num_complex::Complex64;
use rand::Rng;

use crate::circuit::{Circuit, Gate};
use crate::error::Result;
use crate::hamiltonian::{LayeredHamiltonian, LocalTerm, TwoLayerInstance};
use crate::linalg::{self, CMat};
use crate::reductions::cgscon::{completeness_path, CgsconInstance, TraversalPath};
use crate::rng::{complex_gaussian, haar_unitary};
use crate::state::{OperatorFactor, StateVector};

pub fn random_state(n: usize, rng: &mut impl Rng) -> StateVector {
    let amps: Vec<Complex64> = (0..1usize << n).map(|_| complex_gaussian(rng)).collect();
    StateVector::from_amplitudes(n, amps)
        .expect("dimension by construction")
        .normalize()
        .expect("gaussian vector is nonzero")
}

fn random_support(n: usize, k: usize, rng: &mut impl Rng) -> Vec<usize> {
    let mut support: Vec<usize> = Vec::new();
    while support.len() < k {
        let q = rng.random_range(0..n);
        if !support.contains(&q) {
            support.push(q);
        }
    }
    support.sort_unstable();
    support
}

/// Random Hermitian matrix with entries of scale ~1.
pub fn random_hermitian(dim: usize, rng: &mut impl Rng) -> CMat {
    let g = CMat::from_fn(dim, dim, |_, _| complex_gaussian(rng));
    (&g + g.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Random PSD local Hamiltonian (no commutation structure), each term of
/// norm at most 1, locality ≤ `max_locality`.
pub fn random_psd_hamiltonian(
    n: usize,
    num_terms: usize,
    max_locality: usize,
    rng: &mut impl Rng,
) -> Result<LayeredHamiltonian> {
    let mut terms = Vec::with_capacity(num_terms);
    for _ in 0..num_terms {
        let k = rng.random_range(1..=max_locality.min(n));
        let support = random_support(n, k, rng);
        let dim = 1usize << k;
        let u = haar_unitary(dim, rng);
        let mut d = CMat::zeros(dim, dim);
        for i in 0..dim {
            d[(i, i)] = Complex64::new(rng.random::<f64>(), 0.0);
        }
        let m = &u * d * u.adjoint();
        terms.push(LocalTerm::new(
            rng.random::<f64>(),
            vec![OperatorFactor::new(support, m)?],
        )?);
    }
    LayeredHamiltonian::singleton_layers(n, terms)
}

/// Per-qubit dressing unitaries for diagonal-in-a-rotated-basis layers.
pub fn tensor_dressing(n: usize, rng: &mut impl Rng) -> Vec<CMat> {
    (0..n).map(|_| haar_unitary(2, rng)).collect()
}

/// A commuting layer of terms V D V† with D diagonal PSD and D[0,0] = 0,
/// where V is the tensor of the given per-qubit unitaries restricted to each
/// term's support. All terms commute and share the ground state V|0…0⟩.
/// Coefficients are normalized so the layer sum stays ⪯ I.
pub fn dressed_diagonal_layer(
    n: usize,
    num_terms: usize,
    max_locality: usize,
    dressing: &[CMat],
    rng: &mut impl Rng,
) -> Result<Vec<LocalTerm>> {
    let mut terms = Vec::with_capacity(num_terms);
    for _ in 0..num_terms {
        let k = rng.random_range(1..=max_locality.min(n));
        let support = random_support(n, k, rng);
        let dim = 1usize << k;
        let mut d = CMat::zeros(dim, dim);
        for i in 1..dim {
            d[(i, i)] = Complex64::new(rng.random::<f64>(), 0.0);
        }
        let mut w = CMat::identity(1, 1);
        for &q in &support {
            w = linalg::kron(&dressing[q], &w);
        }
        let m = &w * d * w.adjoint();
        terms.push(LocalTerm::new(
            1.0 / num_terms as f64,
            vec![OperatorFactor::new(support, m)?],
        )?);
    }
    Ok(terms)
}

/// A commuting layer of projectors (I + s·P)/2 onto mutually commuting
/// Pauli strings (rejection-sampled), coefficients normalized to keep the
/// layer ⪯ I.
pub fn pauli_projector_layer(
    n: usize,
    num_terms: usize,
    max_locality: usize,
    rng: &mut impl Rng,
) -> Result<Vec<LocalTerm>> {
    fn pauli(idx: usize) -> CMat {
        let o = Complex64::ZERO;
        let l = Complex64::ONE;
        let i = Complex64::new(0.0, 1.0);
        match idx {
            0 => CMat::from_row_slice(2, 2, &[l, o, o, l]),
            1 => CMat::from_row_slice(2, 2, &[o, l, l, o]),
            2 => CMat::from_row_slice(2, 2, &[o, -i, i, o]),
            _ => CMat::from_row_slice(2, 2, &[l, o, o, -l]),
        }
    }
    // A Pauli string as (support, letters); strings commute iff they
    // anticommute on an even number of shared qubits.
    let commutes = |a: &(Vec<usize>, Vec<usize>), b: &(Vec<usize>, Vec<usize>)| {
        let mut anti = 0usize;
        for (qa, la) in a.0.iter().zip(&a.1) {
            for (qb, lb) in b.0.iter().zip(&b.1) {
                if qa == qb && la != lb {
                    anti += 1;
                }
            }
        }
        anti.is_multiple_of(2)
    };
    let mut strings: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    let mut guard = 0;
    while strings.len() < num_terms && guard < 2000 {
        guard += 1;
        let k = rng.random_range(1..=max_locality.min(n));
        let support = random_support(n, k, rng);
        let letters: Vec<usize> = (0..k).map(|_| rng.random_range(1..4usize)).collect();
        let cand = (support, letters);
        if strings.iter().all(|s| commutes(s, &cand)) {
            strings.push(cand);
        }
    }
    let mut terms = Vec::with_capacity(strings.len());
    let count = strings.len().max(1);
    for (support, letters) in strings {
        let dim = 1usize << support.len();
        let mut p = CMat::identity(1, 1);
        for &l in letters.iter().rev() {
            p = linalg::kron(&p, &pauli(l));
        }
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let m = (linalg::identity(dim) + p * Complex64::new(sign, 0.0))
            * Complex64::new(0.5, 0.0);
        terms.push(LocalTerm::new(
            1.0 / count as f64,
            vec![OperatorFactor::new(support, m)?],
        )?);
    }
    Ok(terms)
}

/// A YES two-layer instance whose layers share the efficiently preparable
/// ground state V|0…0⟩ at energy exactly zero, together with the preparation
/// circuit. `alpha` must be positive (the instance is genuinely YES since
/// the optimum is 0 ≤ alpha).
pub fn shared_ground_two_layer(
    n: usize,
    terms_per_layer: usize,
    alpha: f64,
    beta: f64,
    rng: &mut impl Rng,
) -> Result<(TwoLayerInstance, Circuit)> {
    let dressing = tensor_dressing(n, rng);
    let a = LayeredHamiltonian::commuting(
        n,
        dressed_diagonal_layer(n, terms_per_layer, 3, &dressing, rng)?,
    )?;
    let b = LayeredHamiltonian::commuting(
        n,
        dressed_diagonal_layer(n, terms_per_layer, 3, &dressing, rng)?,
    )?;
    let t = TwoLayerInstance::new(a, b, alpha, beta)?;
    let mut prep = Circuit::new(n)?;
    for (q, u) in dressing.iter().enumerate() {
        prep.push(Gate::raw1(q, u.clone())?)?;
    }
    Ok((t, prep))
}

/// A two-layer instance with independently dressed layers: A annihilates
/// V|0…0⟩ but B generally does not. Returns the instance, the preparation
/// circuit for V|0…0⟩, and the achieved energy ⟨ψ|A+B|ψ⟩ (= alpha).
pub fn split_ground_two_layer(
    n: usize,
    terms_per_layer: usize,
    rng: &mut impl Rng,
) -> Result<(TwoLayerInstance, Circuit, f64)> {
    let va = tensor_dressing(n, rng);
    let vb = tensor_dressing(n, rng);
    let a = LayeredHamiltonian::commuting(
        n,
        dressed_diagonal_layer(n, terms_per_layer, 3, &va, rng)?,
    )?;
    let b = LayeredHamiltonian::commuting(
        n,
        dressed_diagonal_layer(n, terms_per_layer, 3, &vb, rng)?,
    )?;
    let mut prep = Circuit::new(n)?;
    for (q, u) in va.iter().enumerate() {
        prep.push(Gate::raw1(q, u.clone())?)?;
    }
    let psi = prep.prepare()?;
    let achieved = a.energy(&psi)? + b.energy(&psi)?;
    let beta = (achieved + 0.5).min(2.0);
    let t = TwoLayerInstance::new(a, b, achieved, beta)?;
    Ok((t, prep, achieved))
}

/// A certified NO instance: A + B = β·I exactly, split as β·P₀ and β·P₁ on
/// one qubit (`spread` = false) or spread as Σ_q (β/n)(P₀/P₁ on q)
/// (`spread` = true). β must lie in (0, 1] so each term keeps norm ≤ 1.
pub fn certified_no_two_layer(n: usize, beta: f64, spread: bool) -> Result<TwoLayerInstance> {
    let mut a_terms = Vec::new();
    let mut b_terms = Vec::new();
    if spread {
        for q in 0..n {
            a_terms.push(LocalTerm::new(
                beta / n as f64,
                vec![OperatorFactor::basis_projector(vec![q], 0)?],
            )?);
            b_terms.push(LocalTerm::new(
                beta / n as f64,
                vec![OperatorFactor::basis_projector(vec![q], 1)?],
            )?);
        }
    } else {
        a_terms.push(LocalTerm::new(
            beta,
            vec![OperatorFactor::basis_projector(vec![0], 0)?],
        )?);
        b_terms.push(LocalTerm::new(
            beta,
            vec![OperatorFactor::basis_projector(vec![0], 1)?],
        )?);
    }
    let a = LayeredHamiltonian::commuting(n, a_terms)?;
    let b = LayeredHamiltonian::commuting(n, b_terms)?;
    TwoLayerInstance::new(a, b, 0.0, beta)
}

/// Uniformly random path: Haar 2-qubit gates on random pairs.
pub fn random_path(num_qubits: usize, len: usize, rng: &mut impl Rng) -> Result<TraversalPath> {
    let mut gates = Vec::with_capacity(len);
    for _ in 0..len {
        let pair = random_support(num_qubits, 2, rng);
        gates.push(Gate::raw2(pair[0], pair[1], haar_unitary(4, rng))?);
    }
    TraversalPath::new(num_qubits, gates)
}

/// The completeness path with a small random 2-qubit perturbation inserted
/// after every gate: reaches the target up to O(noise · length) while
/// picking up a nonzero penalty overlap.
pub fn perturbed_completeness_path(
    inst: &CgsconInstance,
    prep: &Circuit,
    noise: f64,
    rng: &mut impl Rng,
) -> Result<TraversalPath> {
    let base = completeness_path(inst, prep)?;
    let n = inst.num_qubits();
    let mut gates = Vec::with_capacity(2 * base.len());
    for g in base.gates() {
        gates.push(g.clone());
        let pair = random_support(n, 2, rng);
        let h = random_hermitian(4, rng) * Complex64::new(noise, 0.0);
        gates.push(Gate::raw2(pair[0], pair[1], linalg::exp_i_hermitian(&h))?);
    }
    TraversalPath::new(n, gates)
}
