//! Variance-minimization VQE for the Lipkin-Meshkov-Glick model.
//!
//! The pipeline runs end to end on a small built-in statevector simulator:
//!
//! 1. [`quasispin`] builds the two parity blocks of the maximum-quasispin
//!    Hamiltonian for `N` particles.
//! 2. [`pauli`] encodes a block and its square as weighted Pauli strings.
//! 3. [`circuits`] provides the one- and two-qubit RY/CNOT ansätze.
//! 4. [`simulator`] samples one measurement circuit per Pauli term, with
//!    optional readout and CNOT noise; [`mitigation`] undoes some of it.
//! 5. [`estimator`] assembles `<H>`, `<H^2>` and the variance
//!    `<H^2> - <H>^2`, exactly or from shots.
//! 6. [`optimizer`] minimizes the variance from many random starts and
//!    clusters the zero-variance states into a spectrum, which
//!    [`analysis`] checks against exact diagonalization.
//!
//! [`cli`] wires all of it behind the `lmg-vqe` binary.

pub mod analysis;
pub mod circuits;
pub mod cli;
pub mod error;
pub mod estimator;
pub mod format;
pub mod mitigation;
pub mod optimizer;
pub mod pauli;
pub mod quasispin;
pub mod seed;
pub mod simulator;

pub use error::{Error, Result};
