//! Quantum Fisher information of unitary channels and Hamiltonian extensions.

pub mod error;
pub mod extensions;
pub mod generator;
pub mod linalg;
pub mod models;
pub mod qfi;

pub use error::{Error, Result};
