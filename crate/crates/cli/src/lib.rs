//! Configuration, single-point runs, scans and standalone FCIDUMP solves.

pub mod config;
pub mod label;
pub mod pipeline;
pub mod scan;

pub use config::{parse_config, parse_config_str, RunConfig};
pub use label::{BasisKind, MethodLabel};
pub use pipeline::{run_point, ResultRecord};
pub use scan::{run_scan, ScanOutcome};

use mraqc::refine::{natural_transform, solve, SolverSpec};
use mraqc::secondq::read_fcidump;
use serde::Serialize;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// Process exit code: 2 for configuration problems, 3 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) | CliError::Io(_) => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FcidumpResult {
    pub solver: String,
    pub n_orbitals: usize,
    pub n_elec: usize,
    pub energy: f64,
    pub occupations: Vec<f64>,
}

/// Solves the Hamiltonian stored in an FCIDUMP file.
pub fn solve_fcidump(path: &Path, spec: &SolverSpec, n_elec: Option<usize>) -> Result<FcidumpResult, CliError> {
    let (t, header) = read_fcidump(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let n_elec = n_elec.unwrap_or(header.nelec);
    if header.ms2 != 0 {
        return Err(CliError::Config(format!("only singlet sectors are supported (MS2 = {})", header.ms2)));
    }
    let out = solve(&t, n_elec, spec, None, None).map_err(|e| CliError::Numerical(e.to_string()))?;
    Ok(FcidumpResult {
        solver: spec.label().to_string(),
        n_orbitals: t.n(),
        n_elec,
        energy: out.energy,
        occupations: natural_transform(&out.rdms.d1).occupations,
    })
}
