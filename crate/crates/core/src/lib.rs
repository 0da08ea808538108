//! Spectrum of light scattered from a Bose-Einstein condensate with a finite,
//! conserved number of atoms.
//!
//! Number conservation turns the excited-atom mode into an f-deformed
//! oscillator, `B = b sqrt(1 - eta (b^dag b - 1))` with `eta = 1/N`. The
//! crate provides
//!
//! - [`model`]: the nonlinear mean-field steady state, its linearized
//!   fluctuations and the resulting spectrum;
//! - [`algebra`]: truncated Fock-space matrices of the deformed operators;
//! - [`oracle`]: a Lindblad master-equation reference for the same
//!   effective Hamiltonian, with a quantum-regression spectrum;
//! - [`cli`]: the `deformed-bec` command-line front end.

pub mod algebra;
pub mod cli;
pub mod error;
pub mod model;
pub mod oracle;

pub use error::{Error, Result};
pub use num_complex::Complex64;
