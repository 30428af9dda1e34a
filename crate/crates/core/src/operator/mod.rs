//! Numerical kernels: Pauli algebra, sparse operators, Krylov methods and
//! state observables.
//!
//! Basis convention: site 0 is the most significant bit of a basis index and
//! `Z|0⟩ = +|0⟩`.

pub mod dense;
pub mod eigs;
pub mod expm;
mod lanczos;
pub mod pauli;
pub mod solve;
pub mod sparse;
pub mod state;

pub use eigs::{extremal_eigs, extremal_eigs_with, EigOptions, Which};
pub use expm::{expm_apply, expm_apply_with, ExpmOptions, KRYLOV_MAX_DIM};
pub use pauli::{collect_terms, Pauli, PauliString};
pub use solve::{shifted_solve, shifted_solve_with, SolveOptions, SolveReport};
pub use sparse::{assemble, assemble_with_cap, matvec, LinearOperator, Scaled, SparseOperator};
pub use state::{energy_moments, entanglement_entropy, fidelity, StateVector};
