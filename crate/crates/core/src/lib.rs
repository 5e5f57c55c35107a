//! Vibronic dimer energy-transfer model: two two-level chromophores, each carrying
//! one displaced harmonic mode, coupled by dipole-dipole interaction.
//!
//! The crate builds the Hamiltonian in a truncated number-state basis, propagates
//! by exact diagonalization, prepares coherent and Fock initial states, applies
//! impulsive polarized pulses, and evaluates the four-pulse phase-locked
//! wavepacket-interferometry signal.

pub mod error;
pub mod franck_condon;
pub mod hamiltonian;
pub mod interferometry;
pub mod ladder;
pub mod model;
pub mod observables;
pub mod pulses;
pub mod spectral;
pub mod states;
pub mod surfaces;

pub use error::{Error, Result};
pub use franck_condon::{franck_condon_1d, franck_condon_2d};
pub use hamiltonian::{build_hamiltonian, HamiltonianMatrix};
pub use interferometry::{InterferometryModel, Schedule};
pub use model::{DimerParams, Electronic, StateVector, VibronicBasis};
pub use spectral::{diagonalize, EigenSystem, Propagator};
