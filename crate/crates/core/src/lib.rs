//! Exact state-vector simulation of Lorentzian energy filtering of product states.
//!
//! A product state `|Ψ⟩` with energy `E₀` is filtered by `(1 + iδ⁻¹(H − E))⁻¹`,
//! which suppresses eigencomponents by the Lorentzian weight
//! `1 / (1 + δ⁻²(eₙ − E)²)`. The filtered state is the unique zero-energy ground
//! state of the parent Hamiltonian `𝓗 = 𝓕†(Σᵢ Pᵢ)𝓕`, which can be reached by
//! adiabatically switching on `δ⁻¹`.
//!
//! The crate is organised as:
//!
//! - [`operator`]: Pauli strings, sparse operators, Krylov eigen/propagator/solver
//!   kernels and state observables.
//! - [`model`]: the transverse-field Ising benchmark, product states, annihilating
//!   projectors and classical product-state moments.
//! - [`filter`]: the filter itself, filtered states, parent Hamiltonians, gap
//!   certificates and the Gaussian variance theory.
//! - [`adiabatic`]: schedules, exact stepwise propagation and first-order Trotter
//!   evolution.
//! - [`circuit`]: three-part Pauli decomposition of the parent Hamiltonian,
//!   disjoint-support layer scheduling and the `.lfc` circuit text format.
//! - [`harness`]: experiment configuration, sweeps, presets and CSV output.

pub mod adiabatic;
pub mod circuit;
pub mod error;
pub mod filter;
pub mod harness;
pub mod model;
pub mod operator;

pub use error::{Error, Result};
pub use num_complex::Complex64;
