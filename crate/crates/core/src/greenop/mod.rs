//! Separated Gaussian expansions of the Poisson and bound-state Helmholtz
//! kernels, applied to 3D trees as sums of rank-one convolutions.
//!
//! Conventions: [`SeparatedKernel::build`] approximates the positive kernel
//! `e^{-κr}/(4πr)` (`κ = 0` is Poisson); [`SeparatedKernel::coulomb`]
//! includes the factor `4π`, so applying it to `ρ` yields `∫ρ(r')/|r−r'| dr'`.
//! Signs and the `-2` of the orbital update are left to the callers.

mod apply;
mod blocks;
mod kernel;

pub use apply::{apply, apply_with_screen, DEFAULT_SCREEN};
pub use blocks::gauss_block;
pub use kernel::{GaussianTerm, SeparatedKernel};

use crate::mra::{FunctionTree, MraError};
use thiserror::Error;

/// Smallest radius any default kernel must resolve (bohr); tied to the
/// nuclear smoothing length floor.
pub const DEFAULT_R_LO: f64 = 1e-4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GreenError {
    #[error("invalid kernel request: {0}")]
    InvalidKernel(String),
    #[error("kernel accuracy {requested:e} not reachable within the term budget (best {achieved:e})")]
    AccuracyNotReached { requested: f64, achieved: f64 },
    #[error("convolutions are implemented for 3D trees only, got d = {0}")]
    Dimension(usize),
    #[error("kernel range [{r_lo}, {r_hi}] does not cover the domain [{needed_lo}, {needed_hi}]")]
    DomainCoverage {
        r_lo: f64,
        r_hi: f64,
        needed_lo: f64,
        needed_hi: f64,
    },
    #[error(transparent)]
    Mra(#[from] MraError),
}

/// Kernel accuracy used with a tree threshold `thresh`.
pub fn default_kernel_accuracy(thresh: f64) -> f64 {
    (0.1 * thresh).min(1e-5)
}

/// Coulomb operator (`∫ρ(r')/|r−r'|`) covering the domain of `f`.
pub fn coulomb_operator(half_width: f64, thresh: f64) -> Result<SeparatedKernel, GreenError> {
    SeparatedKernel::coulomb(default_kernel_accuracy(thresh), DEFAULT_R_LO, 2.0 * 3f64.sqrt() * half_width)
}

/// Bound-state Helmholtz operator `e^{-κr}/(4πr)` covering a domain of half-width `half_width`.
pub fn bsh_operator(kappa: f64, half_width: f64, thresh: f64) -> Result<SeparatedKernel, GreenError> {
    SeparatedKernel::build(kappa, default_kernel_accuracy(thresh), DEFAULT_R_LO, 2.0 * 3f64.sqrt() * half_width)
}

/// Coulomb potential `∫ρ(r')/|r−r'| dr'` of a density tree.
pub fn coulomb_potential(rho: &FunctionTree) -> Result<FunctionTree, GreenError> {
    let op = coulomb_operator(rho.half_width(), rho.thresh())?;
    apply(&op, rho)
}
