pub mod bounds;
pub mod error;
pub mod fermion;
pub mod gadget;
pub mod harness;
pub mod numerics;
pub mod pauli;
pub mod schedule;

pub use error::{Error, Result};
pub use pauli::{PauliHamiltonian, PauliString, PauliTerm};
