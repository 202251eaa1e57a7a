//! Circuit-to-Hamiltonian compiler with a unary clock register.
//!
//! A swap-normalized circuit of m gates on n' qubits becomes a Hamiltonian on
//! n' + m qubits with four term families: input penalties, an output penalty,
//! gate-propagation terms, and clock-validity terms. Every term acts on at
//! most 5 qubits and is a projector scaled by 1/(m+1).

use std::collections::BTreeSet;
use std::ops::Range;

use num_complex::Complex64;

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::hamiltonian::{LayeredHamiltonian, LocalTerm};
use crate::linalg::CMat;
use crate::state::{self, OperatorFactor, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TermFamily {
    Input,
    Output,
    Propagation,
    ClockValidity,
}

/// Output of the circuit compiler, with the register bookkeeping needed to
/// build history states and feed the layering pass.
#[derive(Debug, Clone)]
pub struct ClockHamiltonian {
    hamiltonian: LayeredHamiltonian,
    data_qubits: usize,
    gate_count: usize,
    output_qubit: usize,
    witness_qubits: BTreeSet<usize>,
    input_terms: Range<usize>,
    output_terms: Range<usize>,
    prop_terms: Range<usize>,
    clock_terms: Range<usize>,
}

impl ClockHamiltonian {
    pub fn hamiltonian(&self) -> &LayeredHamiltonian {
        &self.hamiltonian
    }

    pub fn num_qubits(&self) -> usize {
        self.data_qubits + self.gate_count
    }

    pub fn data_qubits(&self) -> usize {
        self.data_qubits
    }

    pub fn gate_count(&self) -> usize {
        self.gate_count
    }

    pub fn output_qubit(&self) -> usize {
        self.output_qubit
    }

    pub fn witness_qubits(&self) -> &BTreeSet<usize> {
        &self.witness_qubits
    }

    /// Global index of clock qubit t ∈ {1, …, m}.
    pub fn clock_qubit(&self, t: usize) -> usize {
        debug_assert!((1..=self.gate_count).contains(&t));
        self.data_qubits + t - 1
    }

    /// Coefficient applied to every emitted term.
    pub fn rescale(&self) -> f64 {
        1.0 / (self.gate_count as f64 + 1.0)
    }

    pub fn family_range(&self, family: TermFamily) -> Range<usize> {
        match family {
            TermFamily::Input => self.input_terms.clone(),
            TermFamily::Output => self.output_terms.clone(),
            TermFamily::Propagation => self.prop_terms.clone(),
            TermFamily::ClockValidity => self.clock_terms.clone(),
        }
    }

    pub fn family_terms(&self, family: TermFamily) -> impl Iterator<Item = &LocalTerm> {
        let range = self.family_range(family);
        self.hamiltonian
            .terms()
            .enumerate()
            .filter(move |(i, _)| range.contains(i))
            .map(|(_, t)| t)
    }

    /// Energy contribution of one term family.
    pub fn family_energy(&self, family: TermFamily, psi: &StateVector) -> Result<f64> {
        let mut acc = 0.0;
        for t in self.family_terms(family) {
            acc += t.expectation(psi)?;
        }
        Ok(acc)
    }

    /// Data-register input with the witness state on the witness qubits and
    /// |0⟩ elsewhere.
    pub fn embed_witness(&self, witness: &StateVector) -> Result<StateVector> {
        let qubits: Vec<usize> = self.witness_qubits.iter().copied().collect();
        if witness.num_qubits() != qubits.len() {
            return Err(Error::SizeMismatch { expected: qubits.len(), got: witness.num_qubits() });
        }
        state::embed_on_qubits(self.data_qubits, &qubits, witness)
    }
}

fn ketbra(dim: usize, row: usize, col: usize) -> CMat {
    let mut m = CMat::zeros(dim, dim);
    m[(row, col)] = Complex64::ONE;
    m
}

fn pattern_index(bits: &[u8]) -> usize {
    bits.iter().enumerate().map(|(i, &b)| (b as usize) << i).sum()
}

/// Compile a swap-normalized circuit into a unary-clock Hamiltonian.
///
/// `witness_qubits` are exempt from the input penalty; `output_qubit` is the
/// qubit whose |1⟩ amplitude at the final clock time encodes acceptance.
pub fn circuit_to_clock_hamiltonian(
    circuit: &Circuit,
    output_qubit: usize,
    witness_qubits: &BTreeSet<usize>,
) -> Result<ClockHamiltonian> {
    let n = circuit.num_qubits();
    let m = circuit.len();
    if m == 0 {
        return Err(Error::ParamRange("clock construction needs at least one gate".into()));
    }
    let counts = circuit.per_qubit_gate_counts();
    if let Some((q, &count)) = counts.iter().enumerate().find(|(_, &c)| c > 3) {
        return Err(Error::CircuitNotNormalized { qubit: q, count });
    }
    if output_qubit >= n {
        return Err(Error::SupportOutOfRange { qubit: output_qubit, num_qubits: n });
    }
    for &w in witness_qubits {
        if w >= n {
            return Err(Error::SupportOutOfRange { qubit: w, num_qubits: n });
        }
    }
    if witness_qubits.contains(&output_qubit) {
        return Err(Error::InvalidSupport(
            "output qubit cannot be a witness qubit".into(),
        ));
    }

    let total = n + m;
    let coeff = 1.0 / (m as f64 + 1.0);
    let clock = |t: usize| n + t - 1;
    let mut terms: Vec<LocalTerm> = Vec::new();

    // Input penalties: non-witness data qubits must be |0⟩ at clock time 0.
    let input_start = terms.len();
    for j in 0..n {
        if witness_qubits.contains(&j) {
            continue;
        }
        terms.push(LocalTerm::new(
            coeff,
            vec![
                OperatorFactor::basis_projector(vec![j], 1)?,
                OperatorFactor::basis_projector(vec![clock(1)], 0)?,
            ],
        )?);
    }
    let input_end = terms.len();

    // Output penalty: output qubit must be |1⟩ at clock time m.
    terms.push(LocalTerm::new(
        coeff,
        vec![
            OperatorFactor::basis_projector(vec![output_qubit], 0)?,
            OperatorFactor::basis_projector(vec![clock(m)], 1)?,
        ],
    )?);
    let output_end = terms.len();

    // Propagation terms.
    for (idx, gate) in circuit.gates().iter().enumerate() {
        let t = idx + 1;
        let (window, prev_bits, cur_bits): (Vec<usize>, Vec<u8>, Vec<u8>) = if m == 1 {
            (vec![clock(1)], vec![0], vec![1])
        } else if t == 1 {
            (vec![clock(1), clock(2)], vec![0, 0], vec![1, 0])
        } else if t == m {
            (vec![clock(m - 1), clock(m)], vec![1, 0], vec![1, 1])
        } else {
            (vec![clock(t - 1), clock(t), clock(t + 1)], vec![1, 0, 0], vec![1, 1, 0])
        };
        let cdim = 1usize << window.len();
        let prev = pattern_index(&prev_bits);
        let cur = pattern_index(&cur_bits);

        let mut support: Vec<usize> = gate.qubits().to_vec();
        support.extend_from_slice(&window);
        support.sort_unstable();

        let stay = state::dense_on_region(
            &support,
            &[(&window, &(ketbra(cdim, prev, prev) + ketbra(cdim, cur, cur)))],
        )?;
        let u = gate.matrix().clone();
        let u_dag = u.adjoint();
        let hop_fwd = state::dense_on_region(
            &support,
            &[(gate.qubits(), &u), (&window, &ketbra(cdim, cur, prev))],
        )?;
        let hop_rev = state::dense_on_region(
            &support,
            &[(gate.qubits(), &u_dag), (&window, &ketbra(cdim, prev, cur))],
        )?;
        let matrix = (stay - hop_fwd - hop_rev) * Complex64::new(0.5, 0.0);
        terms.push(LocalTerm::new(coeff, vec![OperatorFactor::new(support, matrix)?])?);
    }
    let prop_end = terms.len();

    // Clock validity: penalize a 0 followed by a 1.
    for t in 1..m {
        terms.push(LocalTerm::new(
            coeff,
            vec![OperatorFactor::basis_projector(vec![clock(t), clock(t + 1)], 2)?],
        )?);
    }
    let clock_end = terms.len();

    let hamiltonian = LayeredHamiltonian::singleton_layers(total, terms)?;
    Ok(ClockHamiltonian {
        hamiltonian,
        data_qubits: n,
        gate_count: m,
        output_qubit,
        witness_qubits: witness_qubits.clone(),
        input_terms: input_start..input_end,
        output_terms: input_end..output_end,
        prop_terms: output_end..prop_end,
        clock_terms: prop_end..clock_end,
    })
}

/// Uniform superposition over computation snapshots entangled with the unary
/// clock: (m+1)^{-1/2} Σ_i (U_i ⋯ U_1 |input⟩) ⊗ |unary(i)⟩.
pub fn history_state(circuit: &Circuit, input: &StateVector) -> Result<StateVector> {
    let n = circuit.num_qubits();
    if input.num_qubits() != n {
        return Err(Error::SizeMismatch { expected: n, got: input.num_qubits() });
    }
    let m = circuit.len();
    let total = n + m;
    if total > state::QUBIT_CAP {
        return Err(Error::RegisterSize { got: total, cap: state::QUBIT_CAP });
    }
    let data_dim = 1usize << n;
    let mut amps = vec![Complex64::ZERO; 1usize << total];
    let weight = 1.0 / (m as f64 + 1.0).sqrt();
    let mut snapshot = input.clone();
    for i in 0..=m {
        if i > 0 {
            snapshot = circuit.gates()[i - 1].apply(&snapshot)?;
        }
        let clock_index = (1usize << i) - 1;
        let base = clock_index << n;
        for (d, a) in snapshot.amplitudes().iter().enumerate() {
            amps[base + d] = a * weight;
        }
        let _ = data_dim;
    }
    StateVector::from_amplitudes(total, amps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Gate;
    use crate::rng::{haar_unitary, stream};
    use crate::spectra;
    use rand::Rng;

    fn always_accept_one_gate() -> (Circuit, ClockHamiltonian) {
        // X on the output qubit maps |0⟩ to |1⟩: accepts with probability 1.
        let circ = Circuit::from_gates(1, vec![Gate::x(0)]).unwrap();
        let h = circuit_to_clock_hamiltonian(&circ, 0, &BTreeSet::new()).unwrap();
        (circ, h)
    }

    #[test]
    fn one_gate_history_state_has_zero_energy() {
        let (circ, h) = always_accept_one_gate();
        let hist = history_state(&circ, &StateVector::zero(1).unwrap()).unwrap();
        assert!((hist.norm() - 1.0).abs() < 1e-12);
        let e = h.hamiltonian().energy(&hist).unwrap();
        assert!(e.abs() < 1e-12, "history energy {e}");
    }

    #[test]
    fn all_terms_are_psd_projectors_with_unit_norm_before_rescale() {
        let mut rng = stream(51, "clock-test", 0);
        let circ = Circuit::from_gates(
            3,
            vec![
                Gate::h(0),
                Gate::cnot(0, 1),
                Gate::raw2(1, 2, haar_unitary(4, &mut rng)).unwrap(),
                Gate::x(2),
            ],
        )
        .unwrap();
        let h = circuit_to_clock_hamiltonian(&circ, 2, &BTreeSet::new()).unwrap();
        let certs = h.hamiltonian().validate_terms().unwrap();
        assert_eq!(certs.len(), 3 + 1 + 4 + 3);
        let coeff = h.rescale();
        for cert in certs {
            assert!(cert.norm <= coeff + 1e-12);
        }
        // locality ≤ 5
        for t in h.hamiltonian().terms() {
            assert!(t.locality() <= 5);
        }
    }

    #[test]
    fn history_states_annihilate_propagation_terms() {
        let mut rng = stream(52, "clock-test", 1);
        for _ in 0..10 {
            let len = rng.random_range(1..=4usize);
            let mut gates = Vec::new();
            for _ in 0..len {
                if rng.random::<f64>() < 0.5 {
                    gates.push(Gate::raw1(rng.random_range(0..2), haar_unitary(2, &mut rng)).unwrap());
                } else {
                    gates.push(Gate::raw2(0, 1, haar_unitary(4, &mut rng)).unwrap());
                }
            }
            let circ = Circuit::from_gates(2, gates).unwrap();
            let h = circuit_to_clock_hamiltonian(&circ, 0, &BTreeSet::new()).unwrap();
            let amps: Vec<Complex64> =
                (0..4).map(|_| crate::rng::complex_gaussian(&mut rng)).collect();
            let input = StateVector::from_amplitudes(2, amps).unwrap().normalize().unwrap();
            let hist = history_state(&circ, &input).unwrap();
            let e_prop = h.family_energy(TermFamily::Propagation, &hist).unwrap();
            assert!(e_prop.abs() < 1e-10, "propagation energy {e_prop}");
            let e_clock = h.family_energy(TermFamily::ClockValidity, &hist).unwrap();
            assert!(e_clock.abs() < 1e-12);
        }
    }

    #[test]
    fn accepting_circuit_ground_energy_is_zero() {
        // CNOT from witness to output plus X on witness accepts every
        // computational witness after the X: pick the simple always-accept
        // X-on-output circuit at m ≤ 4 and check the dense ground energy.
        let (_, h) = always_accept_one_gate();
        let r = spectra::ground_energy_dense(h.hamiltonian()).unwrap();
        assert!(r.value.abs() < 1e-10, "ground energy {}", r.value);

        // Two-gate variant: X then identity-raw on the same qubit.
        let circ2 = Circuit::from_gates(
            2,
            vec![Gate::x(0), Gate::cnot(0, 1)],
        )
        .unwrap();
        let h2 = circuit_to_clock_hamiltonian(&circ2, 1, &BTreeSet::new()).unwrap();
        let r2 = spectra::ground_energy_dense(h2.hamiltonian()).unwrap();
        assert!(r2.value.abs() < 1e-10, "ground energy {}", r2.value);
    }

    #[test]
    fn rejecting_circuit_ground_energy_is_bounded_away_from_zero() {
        // Identity gate leaves the output at |0⟩: rejects all inputs.
        let circ = Circuit::from_gates(
            1,
            vec![Gate::raw1(0, crate::linalg::identity(2)).unwrap()],
        )
        .unwrap();
        let h = circuit_to_clock_hamiltonian(&circ, 0, &BTreeSet::new()).unwrap();
        let r = spectra::ground_energy_dense(h.hamiltonian()).unwrap();
        assert!(r.value > 1e-3, "rejecting ground energy {}", r.value);
    }

    #[test]
    fn witness_qubits_skip_input_penalty() {
        let circ = Circuit::from_gates(2, vec![Gate::cnot(1, 0)]).unwrap();
        let witness: BTreeSet<usize> = [1].into_iter().collect();
        let h = circuit_to_clock_hamiltonian(&circ, 0, &witness).unwrap();
        assert_eq!(h.family_range(TermFamily::Input).len(), 1);
        // Witness |1⟩ flips the output: zero-energy history state exists.
        let w = StateVector::basis(1, 1).unwrap();
        let input = h.embed_witness(&w).unwrap();
        let hist = history_state(&circ, &input).unwrap();
        let e = h.hamiltonian().energy(&hist).unwrap();
        assert!(e.abs() < 1e-12);
    }

    #[test]
    fn empty_circuit_history_state_is_the_input() {
        let circ = Circuit::new(2).unwrap();
        let mut rng = stream(53, "clock-test", 2);
        let amps: Vec<Complex64> =
            (0..4).map(|_| crate::rng::complex_gaussian(&mut rng)).collect();
        let input = StateVector::from_amplitudes(2, amps).unwrap().normalize().unwrap();
        let hist = history_state(&circ, &input).unwrap();
        assert_eq!(hist.num_qubits(), 2);
        assert!(hist.distance(&input).unwrap() < 1e-15);
    }

    #[test]
    fn data_qubit_degrees_stay_at_most_four_after_normalization() {
        // Busy circuit whose output qubit carries a single gate: after
        // swap-normalization every data qubit sees at most 3 propagation
        // terms plus one input/output penalty.
        let mut rng = stream(54, "clock-test", 3);
        let mut circ = Circuit::new(3).unwrap();
        for _ in 0..5 {
            circ.push(Gate::raw2(1, 2, haar_unitary(4, &mut rng)).unwrap()).unwrap();
        }
        circ.push(Gate::x(0)).unwrap();
        let (norm, relabel) = circ.swap_normalize();
        let output = relabel[0];
        let h = circuit_to_clock_hamiltonian(&norm, output, &BTreeSet::new()).unwrap();
        let profile = h.hamiltonian().degree_profile();
        for q in 0..h.data_qubits() {
            assert!(
                profile.per_qubit[q] <= 4,
                "data qubit {q} has degree {}",
                profile.per_qubit[q]
            );
        }
        // Clock degrees are reported, not bounded.
        let clock_max = (1..=h.gate_count())
            .map(|t| profile.per_qubit[h.clock_qubit(t)])
            .max()
            .unwrap();
        assert!(clock_max >= 1);
    }

    #[test]
    fn normalization_precondition_enforced() {
        let mut circ = Circuit::new(1).unwrap();
        for _ in 0..4 {
            circ.push(Gate::x(0)).unwrap();
        }
        let err = circuit_to_clock_hamiltonian(&circ, 0, &BTreeSet::new());
        assert!(matches!(err, Err(Error::CircuitNotNormalized { qubit: 0, count: 4 })));
    }
}
