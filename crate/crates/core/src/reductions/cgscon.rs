//! Two-layer → commuting ground-space-connectivity compiler.
//!
//! The input layers A and B are lifted onto a register extended by two
//! 3-qubit blocks: a *marker* block that the intended traversal flips from
//! 000 to 111, and a *guard* block whose projector G = I⊗I⊗Π penalizes any
//! state leaving span{|000⟩, |111⟩}. A-terms are dressed with Π on the
//! marker and P₊ on the guard, B-terms with Π and P₋; orthogonality of P₊
//! and P₋ makes the whole layer commute.

use num_complex::Complex64;

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::hamiltonian::{LayeredHamiltonian, LocalTerm, TwoLayerInstance};
use crate::state::{OperatorFactor, StateVector};

/// Energy tolerance allowed at the two prepared endpoint states.
pub const ENDPOINT_TOL: f64 = 1e-10;
/// Constant in the NO-side threshold s = β²/(64·m_max⁶).
pub const SOUNDNESS_CONSTANT: f64 = 1.0 / 64.0;

/// Register layout of a compiled connectivity instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitRegisters {
    pub data_qubits: usize,
    pub marker: [usize; 3],
    pub guard: [usize; 3],
}

impl SplitRegisters {
    pub fn for_data(n: usize) -> Self {
        SplitRegisters {
            data_qubits: n,
            marker: [n, n + 1, n + 2],
            guard: [n + 3, n + 4, n + 5],
        }
    }

    pub fn total_qubits(&self) -> usize {
        self.data_qubits + 6
    }
}

/// |000⟩⟨000| on a 3-qubit block.
pub fn projector_000(block: [usize; 3]) -> OperatorFactor {
    OperatorFactor::basis_projector(block.to_vec(), 0).expect("3-qubit block")
}

/// |111⟩⟨111| on a 3-qubit block.
pub fn projector_111(block: [usize; 3]) -> OperatorFactor {
    OperatorFactor::basis_projector(block.to_vec(), 7).expect("3-qubit block")
}

/// Π = I − |000⟩⟨000| − |111⟩⟨111| on a 3-qubit block.
pub fn projector_outside_span(block: [usize; 3]) -> OperatorFactor {
    let mut m = crate::linalg::identity(8);
    m[(0, 0)] = Complex64::ZERO;
    m[(7, 7)] = Complex64::ZERO;
    OperatorFactor::new(block.to_vec(), m).expect("3-qubit block")
}

fn ghz_projector(block: [usize; 3], sign: f64) -> OperatorFactor {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut v = vec![Complex64::ZERO; 8];
    v[0] = Complex64::new(s, 0.0);
    v[7] = Complex64::new(sign * s, 0.0);
    OperatorFactor::rank1_projector(block.to_vec(), &v).expect("3-qubit block")
}

/// P₊ = ½(|000⟩+|111⟩)(⟨000|+⟨111|).
pub fn projector_ghz_plus(block: [usize; 3]) -> OperatorFactor {
    ghz_projector(block, 1.0)
}

/// P₋ = ½(|000⟩−|111⟩)(⟨000|−⟨111|).
pub fn projector_ghz_minus(block: [usize; 3]) -> OperatorFactor {
    ghz_projector(block, -1.0)
}

/// A commuting connectivity instance: Hamiltonian, preparation circuits for
/// the two endpoint states, thresholds, and a path-length budget.
#[derive(Debug, Clone)]
pub struct CgsconInstance {
    pub hamiltonian: LayeredHamiltonian,
    pub prep_start: Circuit,
    pub prep_target: Circuit,
    pub c: f64,
    pub s: f64,
    pub m_max: usize,
    /// Locality allowed for traversal gates (2 throughout).
    pub k_unitaries: usize,
    /// Designated penalty projector whose overlap defines δ along a path.
    pub penalty: Option<OperatorFactor>,
    pub registers: Option<SplitRegisters>,
    /// The originating two-layer instance, kept for the inequality checks.
    pub source: Option<TwoLayerInstance>,
}

impl CgsconInstance {
    pub fn num_qubits(&self) -> usize {
        self.hamiltonian.num_qubits()
    }

    pub fn start_state(&self) -> Result<StateVector> {
        self.prep_start.prepare()
    }

    pub fn target_state(&self) -> Result<StateVector> {
        self.prep_target.prepare()
    }

    /// Structural and semantic checks: commuting single layer, thresholds
    /// ordered, endpoint states at zero energy.
    pub fn validate(&self) -> Result<()> {
        if self.prep_start.num_qubits() != self.num_qubits()
            || self.prep_target.num_qubits() != self.num_qubits()
        {
            return Err(Error::LayoutMismatch(
                "preparation circuits must act on the instance register".into(),
            ));
        }
        let ordered = self.c < self.s;
        if !ordered {
            return Err(Error::ThresholdOrder { c: self.c, s: self.s });
        }
        let report = self.hamiltonian.check_layered()?;
        if !report.ok {
            let w = report.worst.unwrap();
            return Err(Error::NotCommuting {
                layer: w.layer,
                first: w.first,
                second: w.second,
                norm: w.norm,
            });
        }
        for state in [self.start_state()?, self.target_state()?] {
            let e = self.hamiltonian.energy(&state)?;
            if e.abs() > ENDPOINT_TOL {
                return Err(Error::ParamRange(format!(
                    "endpoint state has energy {e:.3e}, not a ground state"
                )));
            }
        }
        Ok(())
    }
}

/// An ordered sequence of 1- and 2-qubit gates on an instance register.
#[derive(Debug, Clone)]
pub struct TraversalPath {
    num_qubits: usize,
    gates: Vec<Gate>,
}

impl TraversalPath {
    pub fn new(num_qubits: usize, gates: Vec<Gate>) -> Result<Self> {
        for g in &gates {
            crate::state::check_support(g.qubits(), num_qubits, 2)?;
        }
        Ok(TraversalPath { num_qubits, gates })
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
}

/// Compile a valid two-layer instance into a commuting connectivity
/// instance with endpoint states |0ⁿ⟩|000⟩|000⟩ and |0ⁿ⟩|111⟩|000⟩.
pub fn from_two_layer(t: &TwoLayerInstance, m_max: usize) -> Result<CgsconInstance> {
    if m_max == 0 {
        return Err(Error::ParamRange("path budget m_max must be positive".into()));
    }
    t.validate_commuting()?;
    t.validate_bounded()?;

    let regs = SplitRegisters::for_data(t.num_qubits());
    let total = regs.total_qubits();
    let mut terms: Vec<LocalTerm> = Vec::new();
    for a_term in &t.a().layers()[0] {
        let mut factors = a_term.factors().to_vec();
        factors.push(projector_outside_span(regs.marker));
        factors.push(projector_ghz_plus(regs.guard));
        terms.push(LocalTerm::new(a_term.coefficient(), factors)?);
    }
    for b_term in &t.b().layers()[0] {
        let mut factors = b_term.factors().to_vec();
        factors.push(projector_outside_span(regs.marker));
        factors.push(projector_ghz_minus(regs.guard));
        terms.push(LocalTerm::new(b_term.coefficient(), factors)?);
    }
    terms.push(LocalTerm::new(1.0, vec![projector_outside_span(regs.guard)])?);
    let hamiltonian = LayeredHamiltonian::commuting(total, terms)?;

    let prep_start = Circuit::new(total)?;
    let mut prep_target = Circuit::new(total)?;
    for q in regs.marker {
        prep_target.push(Gate::x(q))?;
    }

    let c = t.alpha() / 2.0;
    let s = SOUNDNESS_CONSTANT * t.beta().powi(2) / (m_max as f64).powi(6);
    let ordered = c < s;
    if !ordered {
        return Err(Error::ThresholdOrder { c, s });
    }

    Ok(CgsconInstance {
        hamiltonian,
        prep_start,
        prep_target,
        c,
        s,
        m_max,
        k_unitaries: 2,
        penalty: Some(projector_outside_span(regs.guard)),
        registers: Some(regs),
        source: Some(t.clone()),
    })
}

/// The intended witness path: run the preparation circuit on the data
/// register, flip the marker block qubit by qubit, then undo the
/// preparation. Length 2·m′ + 3 for an m′-gate preparation.
pub fn completeness_path(inst: &CgsconInstance, prep: &Circuit) -> Result<TraversalPath> {
    let regs = inst.registers.ok_or_else(|| {
        Error::LayoutMismatch("instance lacks the marker/guard register layout".into())
    })?;
    if prep.num_qubits() != regs.data_qubits {
        return Err(Error::LayoutMismatch(format!(
            "preparation circuit acts on {} qubits, data register has {}",
            prep.num_qubits(),
            regs.data_qubits
        )));
    }
    let mut gates: Vec<Gate> = prep.gates().to_vec();
    for q in regs.marker {
        gates.push(Gate::x(q));
    }
    gates.extend(prep.inverse().gates().iter().cloned());
    TraversalPath::new(inst.num_qubits(), gates)
}
