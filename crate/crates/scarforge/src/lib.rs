//! Floquet permutation automata on periodic qubit chains and the local
//! Hamiltonians obtained from their gate logarithms.
//!
//! A two-layer brickwork of permutation gates `U₀` defines a Floquet unitary
//! `U_F = e^{-iA} e^{-iB}`. Taking the principal logarithm of each gate gives a
//! strictly local Hamiltonian `H = A + B` whose dynamics inherits the
//! protected orbits of the automaton when enough local commutation rules hold.
//!
//! Bit convention: qubit 1 (site index 0) is the most significant bit of a
//! basis-state index. Gate labels are `window value + 1`.

pub mod automaton;
pub mod basis;
pub mod bch;
pub mod dense;
pub mod dynamics;
pub mod error;
pub mod gate;
pub mod hamiltonian;
pub mod logmap;
pub mod models;
pub mod rules;
pub mod sparse;
pub mod spectral;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

/// Version string written into every output header.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
