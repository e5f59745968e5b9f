//! Classical and quantum dynamics of Hamiltonians `H = f(H0)` built on the
//! unit harmonic oscillator `H0 = (x^2 + p^2) / 2`.
//!
//! Classically, `f(H0)` only reparametrizes time by the conserved factor
//! `f'(H0)`. Quantum mechanically the spectral phases `exp(-i t f(E_n))`
//! dephase coherent states, and the [`nogo`] module checks the
//! single-valuedness condition that rules out coherent-state families for
//! generic `f`.

pub mod classical;
pub mod cli;
mod error;
pub mod evolution;
pub mod fock;
mod grid;
pub mod hamiltonian;
pub mod nogo;
pub mod quadrature;
mod table;

pub use num_complex::Complex64;

pub use error::{Error, Result};
pub use grid::uniform_grid;
pub use hamiltonian::{HamiltonianFunction, SpectrumMap};
pub use table::fmt_f64;
