//! Classical toolkit for quantum landscape tomography.
//!
//! The cost of a variational circuit, viewed as a function of a single
//! k-qubit gate `U` with every other gate frozen, is a real bilinear form
//! `f(U) = Σ E[i1,o1,i2,o2] U[o1,i1] conj(U[o2,i2])` in the gate and its
//! adjoint. This crate reconstructs the environment tensor `E` from
//! shot-sampled cost evaluations over designed gate sets, and uses the
//! reconstruction to replace gates one at a time with their optimum.
//!
//! Module map:
//!
//! * [`pauli`], [`clifford`], [`unitary`]: exact Pauli/Clifford algebra and
//!   dense unitaries.
//! * [`circuit`], [`hamiltonian`]: statevector simulation, exact energies and
//!   unbiased single-shot samples.
//! * [`environment`], [`counting`]: exact environment tensors, the horizontal
//!   Pauli decomposition and the measurable-component counts.
//! * [`tomography`]: linear inversion, uniform (2-design) shadows,
//!   tableau-group inversion, cover search and perfect-square tomography.
//! * [`optimizer`]: single-gate minimization, sweeps and the baselines.
//!
//! Data-parallel loops go through [`par`], which uses rayon when the
//! `parallel` feature is enabled and plain iterators otherwise. Results never
//! depend on the thread count.

pub mod circuit;
pub mod clifford;
pub mod counting;
pub mod environment;
mod error;
pub mod hamiltonian;
pub mod optimizer;
pub mod par;
pub mod pauli;
pub mod tomography;
pub mod unitary;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Dense complex matrix. Gate matrices are indexed `[output, input]`.
pub type Matrix = nalgebra::DMatrix<C64>;

/// Crate version embedded in experiment outputs.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
