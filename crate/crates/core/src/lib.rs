//! Numerical laboratory for symmetric computing Hamiltonians.
//!
//! The crate builds the universal-quantum-interface chains, the 31-level translationally
//! invariant computing Hamiltonian and its 49-level penalty extension, the rotationally
//! invariant singlet encoding with its flag patterns, and the solvers needed to check them.

pub mod dfs;
pub mod error;
pub mod flag;
pub mod globalprog;
pub mod numkit;
pub mod qma;
pub mod statevec;
pub mod tchain;
pub mod uqi;
pub mod xxchain;

pub use error::{Error, Result};
pub use numkit::{ComplexVector, SparseOperator, SpectrumResult, TripletBuilder, Which};
