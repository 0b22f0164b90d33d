//! Molecules, the smoothed nuclear potential, and closed-shell
//! Hartree–Fock in the multiwavelet basis.

mod hf;
pub mod kain;
mod molecule;
pub mod ops;
mod orthonormal;
mod potential;

pub use hf::{core_guess, guess_functions, hartree_fock, hartree_fock_with_potential, ScfIteration, ScfOptions, ScfResult};
pub use hf::{bsh_update, determinant_energy, fock_build, sorted_indices, symmetrize, FockBuild};
pub use kain::{KainHistory, KainVector, OrbitalSet};
pub use molecule::{atomic_number, element_symbol, Atom, LengthUnit, Molecule, ANGSTROM_TO_BOHR};
pub use orthonormal::{
    cholesky_orthonormalize, inverse_sqrt, loewdin_orthonormalize, orthonormality_error, orthonormalize,
    overlap_matrix, transform_orbitals, Orthonormalization, MIN_OVERLAP_EIGENVALUE,
};
pub use potential::{smoothed_coulomb, smoothing_length, SmoothedNuclearPotential, MIN_SMOOTHING_LENGTH};

use crate::greenop::GreenError;
use crate::mra::MraError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScfError {
    #[error("invalid molecule: {0}")]
    InvalidMolecule(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("atom at {position:?} lies outside the safe box |x| ≤ {limit}")]
    AtomOutsideBox { position: [f64; 3], limit: f64 },
    #[error("{0} electrons: only closed shells (or the one-electron mode) are supported")]
    OpenShell(usize),
    #[error("overlap matrix is singular (eigenvalue {eigenvalue:e}); dependent orbitals {orbitals:?}")]
    LinearDependence { eigenvalue: f64, orbitals: Vec<usize> },
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NotConverged {
        iterations: usize,
        residual: f64,
        trace: Vec<f64>,
    },
    #[error(transparent)]
    Mra(#[from] MraError),
    #[error(transparent)]
    Green(#[from] GreenError),
}
