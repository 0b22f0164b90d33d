//! Many-body solvers on the qubit Hamiltonian: statevector simulation,
//! SPA-type circuits, VQE, determinant FCI and spin-summed densities.

mod circuit;
mod fci;
mod rdm;
pub mod sector;
mod state;
mod vqe;

pub use circuit::{build_spa_gsd, default_groups, paired_double, single, AnsatzVariant, Circuit, Gate, ShiftRule};
pub use fci::{fci, lowest_eigenpair, sector_hamiltonian, sector_hamiltonian_dense, FciResult, MAX_FCI_QUBITS};
pub use rdm::{measure_rdms, measure_rdms_pauli, RdmDiagnostics, SpinSummedRdms};
pub use sector::{SectorBasis, SectorOperator};
pub use state::{expectation, QubitState, IMAGINARY_TOL, MAX_STATEVECTOR_QUBITS};
pub use vqe::{energy, finite_difference_gradient, gradient, vqe, Observable, VqeOptions, VqeResult, FD_STEP};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WfnError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("{0} qubits exceed the simulator limit")]
    TooLarge(usize),
    #[error("invalid sector: {0}")]
    Sector(String),
    #[error("operator is not Hermitian (imaginary part {0:e})")]
    NotHermitian(f64),
    #[error("state is not normalized (norm {0})")]
    NotNormalized(f64),
    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),
    #[error("invalid density matrices: {0}")]
    InvalidRdm(String),
    #[error("no convergence: {0}")]
    NotConverged(String),
}
