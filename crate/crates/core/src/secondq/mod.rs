//! Integrals over MRA orbitals, their FCIDUMP serialization, and the
//! Jordan–Wigner qubit Hamiltonian.

mod fcidump;
mod hamiltonian;
mod integrals;
pub mod jw;
pub mod pauli;

pub use fcidump::{parse_fcidump, read_fcidump, to_fcidump_string, write_fcidump, FcidumpHeader};
pub use hamiltonian::{encode_hamiltonian, spin_orbital, EncodedHamiltonian};
pub use integrals::{compute_integrals, orbit, transform4, IntegralTensors, ORTHONORMALITY_TOL};
pub use jw::{jordan_wigner, ladder, number_operator, s_squared, total_number, Ladder};
pub use pauli::{Pauli, PauliPolynomial, PauliString};

use crate::greenop::GreenError;
use crate::mra::MraError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SecondqError {
    #[error("orbitals are not orthonormal (max |S − I| = {0:e})")]
    NotOrthonormal(f64),
    #[error("invalid integrals: {0}")]
    Invalid(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Mra(#[from] MraError),
    #[error(transparent)]
    Green(#[from] GreenError),
}
