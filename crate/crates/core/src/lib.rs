//! Workbench for commuting-Hamiltonian ground-space traversal instances.
//!
//! The crate builds layered local Hamiltonians from quantum circuits,
//! compiles them into commuting ground-space-connectivity instances,
//! computes ground energies, certifies the traversal inequalities along
//! concrete gate sequences, and adversarially searches for low-energy
//! traversal paths with a parameterized two-qubit-unitary optimizer.

pub mod circuit;
pub mod error;
pub mod hamiltonian;
pub mod linalg;
pub mod optimizer;
pub mod probe;
pub mod reductions;
pub mod rng;
pub mod spectra;
pub mod state;
pub mod traversal;

pub use circuit::{Circuit, Gate, GateKind};
pub use error::{Error, Result};
pub use hamiltonian::{LayeredHamiltonian, LocalTerm, TwoLayerInstance};
pub use reductions::{CgsconInstance, ClockHamiltonian, LayeredReduction, TraversalPath};
pub use spectra::GroundEnergyResult;
pub use state::{OperatorFactor, StateVector};
pub use traversal::PathTrace;
