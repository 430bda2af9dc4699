//! Lindblad master equation propagation with stochastically bundled dissipators.
//!
//! The crate builds a discretized Morse oscillator coupled to a spin of
//! arbitrary size ([`model`]), derives Davies Lindblad operators from the
//! spectrum of the system Hamiltonian ([`spectral`]), applies either the full
//! dissipator or a randomized compression of it into `M` bundled operators
//! ([`dissipator`]), propagates density matrices with fixed-step RK4
//! ([`propagator`]) and post-processes ensembles of stochastic runs
//! ([`stats`]). [`scenario`] and [`runner`] wire everything together for the
//! command-line driver.
//!
//! All quantities are in atomic units (`ħ = 1`). Propagation is done in the
//! eigenbasis of the system Hamiltonian: the Hamiltonian is diagonal there and
//! the Lindblad operators are sparse.

pub mod dissipator;
pub mod error;
pub mod model;
pub mod propagator;
pub mod runner;
pub mod scenario;
pub mod selftest;
pub mod spectral;
pub mod stats;

mod linalg;

pub use error::{Error, Result};

/// Complex double used for all matrix arithmetic.
pub type C64 = num_complex::Complex64;

/// Dense complex matrix.
pub type CMatrix = ndarray::Array2<C64>;
