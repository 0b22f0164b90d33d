//! Alternating orbital refinement: natural orbitals, Lagrange multipliers,
//! Green's-operator orbital updates at fixed densities, and the macro loop
//! against a wavefunction solver.

mod embed;
mod macro_loop;
mod natural;
mod solve;
mod update;

pub use embed::embed_frozen_core;
pub use macro_loop::{macro_iterate, MacroRecord, MacroState, RefineProblem};
pub use natural::{asymmetry, multipliers, natural_transform, to_natural_orbitals, NaturalOrbitalTransform, DEGENERACY_TOL};
pub use solve::{solve, SolverOutput, SolverSpec};
pub use update::{
    coupling_potentials, kappa, orbital_update, refine_orbitals, update_rhs, CouplingPotentials, MicroOptions, MicroResult,
};

use crate::activespace::ActiveSpaceError;
use crate::greenop::GreenError;
use crate::mra::MraError;
use crate::scf::{Orthonormalization, ScfError};
use crate::secondq::SecondqError;
use crate::wfn::WfnError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RefineError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid refinement setup: {0}")]
    Invalid(String),
    #[error("orbital {orbital} has occupation {occupation:e}, at or below the refinement cutoff")]
    LowOccupation { orbital: usize, occupation: f64 },
    #[error("macro-iteration {iteration}: {source}")]
    Macro {
        iteration: usize,
        #[source]
        source: Box<RefineError>,
    },
    #[error(transparent)]
    Mra(#[from] MraError),
    #[error(transparent)]
    Green(#[from] GreenError),
    #[error(transparent)]
    Scf(#[from] ScfError),
    #[error(transparent)]
    Secondq(#[from] SecondqError),
    #[error(transparent)]
    Wfn(#[from] WfnError),
    #[error(transparent)]
    ActiveSpace(#[from] ActiveSpaceError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefineConfig {
    /// refine only the first `n` active natural orbitals; `None` refines all
    pub opt_count: Option<usize>,
    /// orbitals at or below this occupation are carried but never refined
    pub occupation_cutoff: f64,
    /// micro-loop threshold on `max_i ‖φ_i' − φ_i‖`
    pub micro_tol: f64,
    /// macro-loop threshold on `|E_m − E_{m−1}|`
    pub macro_tol: f64,
    pub max_micro: usize,
    pub max_macro: usize,
    pub kain_size: usize,
    pub orthonormalization: Orthonormalization,
    /// recompute the multipliers in every micro-iteration instead of once per macro step
    pub update_multipliers: bool,
}

impl Default for RefineConfig {
    fn default() -> Self {
        Self {
            opt_count: None,
            occupation_cutoff: 1e-3,
            micro_tol: 1e-3,
            macro_tol: 1e-5,
            max_micro: 10,
            max_macro: 5,
            kain_size: 3,
            orthonormalization: Orthonormalization::Loewdin,
            update_multipliers: true,
        }
    }
}

impl RefineConfig {
    pub fn validate(&self) -> Result<(), RefineError> {
        for (name, v) in [
            ("occupation cutoff", self.occupation_cutoff),
            ("micro threshold", self.micro_tol),
            ("macro threshold", self.macro_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(RefineError::Invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if self.kain_size == 0 {
            return Err(RefineError::Invalid("KAIN subspace size must be at least 1".into()));
        }
        Ok(())
    }

    pub(crate) fn micro_options(&self) -> MicroOptions {
        MicroOptions {
            tol: self.micro_tol,
            max_iterations: self.max_micro,
            kain_size: self.kain_size,
            cutoff: self.occupation_cutoff,
            orthonormalization: self.orthonormalization,
            update_multipliers: self.update_multipliers,
        }
    }
}
