//! Driven five-level M-scheme atom: rotating-frame Hamiltonian, Lindblad
//! generator, steady states, dynamics, dressed-state analysis and parameter
//! sweeps.

pub mod cli;
pub mod dressed;
pub mod error;
pub mod lindblad;
pub mod model;
pub mod solver;
pub mod sweep;

pub use error::{Error, Result};
