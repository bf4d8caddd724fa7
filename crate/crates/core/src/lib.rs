//! Lattice φ⁴ field theory in a truncated Fock basis, mapped onto qubits.
//!
//! The crate is organised bottom-up:
//!
//! - [`lattice`]: model parameters, momentum grid, dispersion and counter-term formulas.
//! - [`fock`]: truncated ladder operators, the lattice Hamiltonian, exact spectra,
//!   counter-term root finding and critical-behaviour fits.
//! - [`encoding`]: Pauli-sum encoding of dense operators and parity-sector blocking.
//! - [`circuit`]: a small statevector / density-matrix simulator with readout and
//!   depolarizing noise.
//! - [`mitigation`]: readout correction, two-qubit tomography and McWeeny purification.
//! - [`vqe`]: the variational loop and mass-gap benchmarks.

// `!(x > 0.0)` deliberately rejects NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod circuit;
pub mod encoding;
mod error;
pub mod fock;
pub mod lattice;
pub mod mitigation;
pub mod optim;
pub mod vqe;

pub use error::{Error, Result};

/// Dense complex matrix used for every operator in the crate.
pub type CMatrix = nalgebra::DMatrix<num_complex::Complex64>;

pub use num_complex::Complex64;
