//! Instance compilers: circuit → clock Hamiltonian, bounded-degree
//! Hamiltonian → two commuting layers, two-layer instance → commuting
//! ground-space-connectivity instance, plus the history-state and
//! completeness-path builders.

pub mod cgscon;
pub mod clock;
pub mod layering;

pub use cgscon::{
    completeness_path, from_two_layer, CgsconInstance, SplitRegisters, TraversalPath,
};
pub use clock::{circuit_to_clock_hamiltonian, history_state, ClockHamiltonian, TermFamily};
pub use layering::{reduce_to_two_layers, LayeredReduction, TermAssignment};
