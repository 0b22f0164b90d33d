//! Adaptive multiresolution representation of real functions on `[-L, L]^d`
//! (`d` = 1 or 3) in a Legendre multiwavelet basis.
//!
//! Trees are stored in reconstructed form: only leaves carry scaling
//! coefficients, and every interior box has all `2^d` children. A leaf is
//! accepted when the wavelet coefficients of its own two-scale split satisfy
//! `‖d‖ ≤ ε · 2^(-n/2)` at level `n`.

mod basis;
mod derivative;
mod io;
mod key;
pub mod quadrature;
pub mod tensor;
mod tree;

pub use basis::{scaling_values, MultiwaveletBasis};
pub use key::NodeKey;
pub use tree::FunctionTree;

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MraError {
    #[error("invalid MRA configuration: {0}")]
    InvalidConfig(String),
    #[error("non-finite function value {value} at point {point:?}")]
    NonFinite { point: Vec<f64>, value: f64 },
    #[error("function trees live on different domains or bases ({0})")]
    Mismatch(String),
    #[error("point {0:?} lies outside the domain")]
    OutsideDomain(Vec<f64>),
    #[error("corrupt serialized tree: {0}")]
    Corrupt(String),
}

/// Numerical parameters shared by every tree of a calculation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MraConfig {
    /// polynomials per dimension per box
    pub k: usize,
    /// truncation threshold ε
    pub thresh: f64,
    /// the domain is `[-half_width, half_width]^d` (bohr)
    pub half_width: f64,
    pub max_depth: u8,
    /// uniform refinement level before adaptivity starts
    pub initial_level: u8,
}

impl Default for MraConfig {
    fn default() -> Self {
        Self {
            k: 7,
            thresh: 1e-4,
            half_width: 50.0,
            max_depth: 20,
            initial_level: 2,
        }
    }
}

impl MraConfig {
    pub fn new(k: usize, thresh: f64, half_width: f64) -> Self {
        Self {
            k,
            thresh,
            half_width,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), MraError> {
        if self.k < 2 {
            return Err(MraError::InvalidConfig(format!("k must be at least 2, got {}", self.k)));
        }
        if !(self.thresh > 0.0) || !self.thresh.is_finite() {
            return Err(MraError::InvalidConfig(format!("threshold must be positive, got {}", self.thresh)));
        }
        if !(self.half_width > 0.0) || !self.half_width.is_finite() {
            return Err(MraError::InvalidConfig(format!("box half-width must be positive, got {}", self.half_width)));
        }
        if self.initial_level > self.max_depth {
            return Err(MraError::InvalidConfig(format!(
                "initial level {} exceeds max depth {}",
                self.initial_level, self.max_depth
            )));
        }
        if self.max_depth > 30 {
            return Err(MraError::InvalidConfig(format!("max depth {} exceeds 30", self.max_depth)));
        }
        Ok(())
    }

    pub fn with_thresh(mut self, thresh: f64) -> Self {
        self.thresh = thresh;
        self
    }
}

/// Shared basis instance for order `k`.
pub fn basis_for(k: usize) -> Arc<MultiwaveletBasis> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<MultiwaveletBasis>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("basis cache poisoned");
    guard
        .entry(k)
        .or_insert_with(|| Arc::new(MultiwaveletBasis::new(k)))
        .clone()
}
