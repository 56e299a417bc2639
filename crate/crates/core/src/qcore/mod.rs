//! Quantum-information primitives: states, Pauli strings, POVMs, channels
//! stored as Choi matrices, sampling and qubit teleportation.

mod channel;
mod pauli;
mod povm;
mod state;
mod teleport;

pub use channel::{apply_channel, choi_of, choi_trace_distance, ent_fidelity, ChoiDistance, QuantumChannel};
pub use pauli::{pauli, pauli_digits, pauli_index, pauli_string};
pub use povm::{sample_povm, MeasurementRecord, PostState, Povm};
pub use state::{max_entangled, DensityOperator, PureState};
pub use teleport::{bell_state, teleport_branches, teleport_measure};
