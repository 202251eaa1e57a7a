//! Quantum circuits over 1- and 2-qubit gates: simulation, inversion, and
//! the SWAP-normalization pass that bounds per-qubit gate counts.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::state::{self, StateVector};

/// Unitary deviation above this rejects a raw gate matrix.
pub const GATE_UNITARY_TOL: f64 = 1e-12;
/// Per-qubit gate budget guaranteed by `swap_normalize`.
pub const GATE_DEGREE_BUDGET: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateKind {
    X,
    H,
    Z,
    T,
    Cnot,
    Swap,
    Raw,
}

/// A 1- or 2-qubit unitary gate. For 2-qubit gates, `qubits()[0]` is the
/// least-significant bit of the 4×4 matrix index.
#[derive(Debug, Clone)]
pub struct Gate {
    kind: GateKind,
    qubits: Vec<usize>,
    matrix: CMat,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

impl Gate {
    pub fn x(q: usize) -> Self {
        let m = CMat::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]);
        Gate { kind: GateKind::X, qubits: vec![q], matrix: m }
    }

    pub fn h(q: usize) -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let m = CMat::from_row_slice(2, 2, &[c(s, 0.), c(s, 0.), c(s, 0.), c(-s, 0.)]);
        Gate { kind: GateKind::H, qubits: vec![q], matrix: m }
    }

    pub fn z(q: usize) -> Self {
        let m = CMat::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]);
        Gate { kind: GateKind::Z, qubits: vec![q], matrix: m }
    }

    pub fn t(q: usize) -> Self {
        let p = std::f64::consts::FRAC_PI_4;
        let m = CMat::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(p.cos(), p.sin())]);
        Gate { kind: GateKind::T, qubits: vec![q], matrix: m }
    }

    /// CNOT with `control` on the low bit of the matrix index.
    pub fn cnot(control: usize, target: usize) -> Self {
        let mut m = CMat::zeros(4, 4);
        // basis index = control_bit + 2·target_bit
        m[(0, 0)] = c(1., 0.);
        m[(3, 1)] = c(1., 0.);
        m[(2, 2)] = c(1., 0.);
        m[(1, 3)] = c(1., 0.);
        Gate { kind: GateKind::Cnot, qubits: vec![control, target], matrix: m }
    }

    pub fn swap(a: usize, b: usize) -> Self {
        let mut m = CMat::zeros(4, 4);
        m[(0, 0)] = c(1., 0.);
        m[(2, 1)] = c(1., 0.);
        m[(1, 2)] = c(1., 0.);
        m[(3, 3)] = c(1., 0.);
        Gate { kind: GateKind::Swap, qubits: vec![a, b], matrix: m }
    }

    /// Arbitrary 1-qubit unitary.
    pub fn raw1(q: usize, matrix: CMat) -> Result<Self> {
        Self::raw(vec![q], matrix)
    }

    /// Arbitrary 2-qubit unitary; `a` is the low bit of the matrix index.
    pub fn raw2(a: usize, b: usize, matrix: CMat) -> Result<Self> {
        Self::raw(vec![a, b], matrix)
    }

    pub fn raw(qubits: Vec<usize>, matrix: CMat) -> Result<Self> {
        if qubits.is_empty() || qubits.len() > 2 {
            return Err(Error::InvalidSupport(format!(
                "gates act on 1 or 2 qubits, got {}",
                qubits.len()
            )));
        }
        if qubits.len() == 2 && qubits[0] == qubits[1] {
            return Err(Error::InvalidSupport("gate operands must be distinct".into()));
        }
        let dim = 1usize << qubits.len();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::SizeMismatch { expected: dim, got: matrix.nrows() });
        }
        let err = linalg::unitarity_error(&matrix);
        if err > GATE_UNITARY_TOL {
            return Err(Error::NotUnitary(err));
        }
        Ok(Gate { kind: GateKind::Raw, qubits, matrix })
    }

    pub fn kind(&self) -> GateKind {
        self.kind
    }

    pub fn qubits(&self) -> &[usize] {
        &self.qubits
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn locality(&self) -> usize {
        self.qubits.len()
    }

    /// Conjugate transpose. Self-inverse kinds keep their name; T and raw
    /// gates become raw.
    pub fn dagger(&self) -> Gate {
        let kind = match self.kind {
            GateKind::X | GateKind::H | GateKind::Z | GateKind::Cnot | GateKind::Swap => self.kind,
            GateKind::T | GateKind::Raw => GateKind::Raw,
        };
        Gate { kind, qubits: self.qubits.clone(), matrix: self.matrix.adjoint() }
    }

    /// Same gate on relabeled qubits.
    fn remapped(&self, map: impl Fn(usize) -> usize) -> Gate {
        Gate {
            kind: self.kind,
            qubits: self.qubits.iter().map(|&q| map(q)).collect(),
            matrix: self.matrix.clone(),
        }
    }

    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        state::check_support(&self.qubits, psi.num_qubits(), 2)?;
        let amps = state::apply_matrix_on(psi.amplitudes(), psi.num_qubits(), &self.qubits, &self.matrix);
        StateVector::from_amplitudes(psi.num_qubits(), amps)
    }
}

#[derive(Debug, Clone)]
pub struct Circuit {
    num_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Result<Self> {
        if num_qubits == 0 || num_qubits > state::QUBIT_CAP {
            return Err(Error::RegisterSize { got: num_qubits, cap: state::QUBIT_CAP });
        }
        Ok(Circuit { num_qubits, gates: Vec::new() })
    }

    pub fn from_gates(num_qubits: usize, gates: Vec<Gate>) -> Result<Self> {
        let mut circ = Self::new(num_qubits)?;
        for g in gates {
            circ.push(g)?;
        }
        Ok(circ)
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        state::check_support(gate.qubits(), self.num_qubits, 2)?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// U_m ⋯ U_1 |input⟩.
    pub fn simulate(&self, input: &StateVector) -> Result<StateVector> {
        if input.num_qubits() != self.num_qubits {
            return Err(Error::SizeMismatch { expected: self.num_qubits, got: input.num_qubits() });
        }
        let mut cur = input.clone();
        for g in &self.gates {
            cur = g.apply(&cur)?;
        }
        Ok(cur)
    }

    /// Output state on |0…0⟩ input.
    pub fn prepare(&self) -> Result<StateVector> {
        self.simulate(&StateVector::zero(self.num_qubits)?)
    }

    /// Reversed gate order with each gate conjugate-transposed.
    pub fn inverse(&self) -> Circuit {
        Circuit {
            num_qubits: self.num_qubits,
            gates: self.gates.iter().rev().map(Gate::dagger).collect(),
        }
    }

    /// Number of gates touching each qubit.
    pub fn per_qubit_gate_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.num_qubits];
        for g in &self.gates {
            for &q in g.qubits() {
                counts[q] += 1;
            }
        }
        counts
    }

    pub fn max_gate_degree(&self) -> usize {
        self.per_qubit_gate_counts().into_iter().max().unwrap_or(0)
    }

    /// True when every qubit carries at most `GATE_DEGREE_BUDGET` gates.
    pub fn is_swap_normalized(&self) -> bool {
        self.max_gate_degree() <= GATE_DEGREE_BUDGET
    }

    /// Rewrite the circuit on an enlarged register so that every qubit is
    /// acted on by at most 3 gates, inserting SWAPs to fresh ancillas when a
    /// qubit would otherwise exceed the budget. Returns the new circuit and
    /// the final physical location of each logical qubit.
    ///
    /// A qubit is swapped out before a gate unless it still has room for the
    /// gate plus any later uses, so circuits already within budget come back
    /// unchanged. Each original gate inserts at most two SWAPs, giving at
    /// most 3m gates total.
    pub fn swap_normalize(&self) -> (Circuit, Vec<usize>) {
        let n = self.num_qubits;
        // remaining[q] = number of gates at index > current touching logical q
        let mut remaining = vec![0usize; n];
        for g in &self.gates {
            for &q in g.qubits() {
                remaining[q] += 1;
            }
        }
        let mut pos: Vec<usize> = (0..n).collect();
        let mut count: Vec<usize> = vec![0; n];
        let mut out: Vec<Gate> = Vec::with_capacity(self.gates.len());
        let mut next_free = n;

        for g in &self.gates {
            for &q in g.qubits() {
                remaining[q] -= 1;
                let p = pos[q];
                let fits = count[p] + 2 <= GATE_DEGREE_BUDGET
                    || (count[p] + 1 == GATE_DEGREE_BUDGET && remaining[q] == 0);
                if !fits {
                    let fresh = next_free;
                    next_free += 1;
                    count.push(0);
                    out.push(Gate::swap(p, fresh));
                    count[p] += 1;
                    count[fresh] += 1;
                    pos[q] = fresh;
                }
            }
            let mapped = g.remapped(|q| pos[q]);
            for &p in mapped.qubits() {
                count[p] += 1;
            }
            out.push(mapped);
        }

        let circuit = Circuit { num_qubits: next_free, gates: out };
        (circuit, pos)
    }
}
