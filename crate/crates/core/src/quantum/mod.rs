//! Hilbert spaces, operators, the effective Hamiltonian and its integrator.

pub mod hamiltonian;
pub mod integrator;
pub mod operators;
pub mod space;
pub mod sparse;
pub mod state;

pub use hamiltonian::{assemble_hamiltonian, Couplings, EffectiveHamiltonian, ModelFlags};
pub use integrator::{evolve_gate, integrate, IntegratorOptions, Trajectory};
pub use operators::{displacement, OperatorSet};
pub use space::{Axis, HilbertSpace, Level, MotionalAxis};
pub use state::{apply_phase_jump, StateVector};
