//! JSON run configuration. Every section has defaults, so `{}` is a valid
//! (if geometry-less) configuration; unknown keys are rejected.

use crate::CliError;
use mraqc::mra::MraConfig;
use mraqc::refine::{RefineConfig, SolverSpec};
use mraqc::scf::{LengthUnit, Molecule, Orthonormalization};
use mraqc::wfn::AnsatzVariant;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// XYZ file, relative to the configuration file
    pub geometry: Option<PathBuf>,
    /// overrides the unit given in the XYZ header
    pub units: Option<String>,
    pub charge: i32,
    /// multiwavelet order
    pub k: usize,
    /// half-width `L` of the cubic box `[-L, L]³` (bohr)
    #[serde(rename = "box")]
    pub box_half_width: f64,
    pub epsilon: f64,
    pub active: ActiveConfig,
    pub solver: SolverConfig,
    /// solver for the final energy when it differs from the refining solver
    pub final_solver: Option<SolverConfig>,
    pub refine: RefineSection,
    pub scan: Option<ScanConfig>,
    pub output: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            geometry: None,
            units: None,
            charge: 0,
            k: 7,
            box_half_width: 50.0,
            epsilon: 1e-4,
            active: ActiveConfig::default(),
            solver: SolverConfig::default(),
            final_solver: None,
            refine: RefineSection::default(),
            scan: None,
            output: PathBuf::from("mraqc-out"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ActiveConfig {
    /// active electrons `N_e`
    pub electrons: Option<usize>,
    /// active qubits `N_q`; when absent every PNO above the cutoff is kept
    pub qubits: Option<usize>,
    pub frozen_core: usize,
    pub occupation_cutoff: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverMethod {
    Fci,
    Vqe,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub method: SolverMethod,
    /// `SPA`, `SPA+GS` or `SPA+GSD`
    pub ansatz: String,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            method: SolverMethod::Vqe,
            ansatz: "SPA+GSD".into(),
            restarts: 10,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn to_spec(&self) -> Result<SolverSpec, CliError> {
        Ok(match self.method {
            SolverMethod::Fci => SolverSpec::Fci,
            SolverMethod::Vqe => {
                let variant = AnsatzVariant::parse(&self.ansatz)
                    .ok_or_else(|| CliError::Config(format!("solver.ansatz: unknown ansatz `{}`", self.ansatz)))?;
                if self.restarts == 0 {
                    return Err(CliError::Config("solver.restarts must be at least 1".into()));
                }
                SolverSpec::Vqe {
                    variant,
                    restarts: self.restarts,
                    seed: self.seed,
                }
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RefineSection {
    pub opt_count: Option<usize>,
    pub occupation_cutoff: f64,
    pub micro_threshold: f64,
    pub macro_threshold: f64,
    pub max_micro: usize,
    pub max_macro: usize,
    pub kain_size: usize,
    /// `loewdin` or `cholesky`
    pub orthonormalization: String,
    pub update_multipliers: bool,
}

impl Default for RefineSection {
    fn default() -> Self {
        let d = RefineConfig::default();
        Self {
            opt_count: d.opt_count,
            occupation_cutoff: d.occupation_cutoff,
            micro_threshold: d.micro_tol,
            macro_threshold: d.macro_tol,
            max_micro: d.max_micro,
            max_macro: d.max_macro,
            kain_size: d.kain_size,
            orthonormalization: "loewdin".into(),
            update_multipliers: d.update_multipliers,
        }
    }
}

impl RefineSection {
    pub fn to_refine_config(&self) -> Result<RefineConfig, CliError> {
        let orthonormalization = match self.orthonormalization.to_ascii_lowercase().as_str() {
            "loewdin" | "lowdin" | "löwdin" => Orthonormalization::Loewdin,
            "cholesky" => Orthonormalization::Cholesky,
            other => {
                return Err(CliError::Config(format!("refine.orthonormalization: unknown scheme `{other}`")));
            }
        };
        let cfg = RefineConfig {
            opt_count: self.opt_count,
            occupation_cutoff: self.occupation_cutoff,
            micro_tol: self.micro_threshold,
            macro_tol: self.macro_threshold,
            max_micro: self.max_micro,
            max_macro: self.max_macro,
            kain_size: self.kain_size,
            orthonormalization,
            update_multipliers: self.update_multipliers,
        };
        cfg.validate().map_err(|e| CliError::Config(format!("refine: {e}")))?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanCoordinate {
    /// distance between the two atoms of a diatomic, about their midpoint
    BondLength,
    /// separation of the centres of two H₂ units (atoms 0–1 and 2–3), moving the second unit
    H4Separation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub coordinate: ScanCoordinate,
    /// coordinate values in the configuration's length unit
    pub grid: Vec<f64>,
}

/// Parses and validates a configuration; relative geometry paths are
/// resolved against `base_dir`.
pub fn parse_config_str(text: &str, base_dir: &Path) -> Result<RunConfig, CliError> {
    let mut cfg: RunConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    if let Some(g) = &cfg.geometry {
        if g.is_relative() {
            cfg.geometry = Some(base_dir.join(g));
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_config_str(&text, base).map_err(|e| match e {
        CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        self.mra_config()
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        if let Some(u) = &self.units {
            parse_unit(u)?;
        }
        self.solver.to_spec()?;
        if let Some(f) = &self.final_solver {
            f.to_spec()?;
        }
        self.refine.to_refine_config()?;
        if let Some(c) = self.active.occupation_cutoff {
            if !(c > 0.0) {
                return Err(CliError::Config(format!("active.occupation_cutoff must be positive, got {c}")));
            }
        }
        if let Some(q) = self.active.qubits {
            if q == 0 || q % 2 != 0 {
                return Err(CliError::Config(format!("active.qubits must be a positive even number, got {q}")));
            }
        }
        if let Some(s) = &self.scan {
            if s.grid.is_empty() || s.grid.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                return Err(CliError::Config("scan.grid must be a non-empty list of positive values".into()));
            }
        }
        Ok(())
    }

    pub fn mra_config(&self) -> MraConfig {
        MraConfig::new(self.k, self.epsilon, self.box_half_width)
    }

    pub fn length_unit(&self) -> Result<Option<LengthUnit>, CliError> {
        self.units.as_deref().map(parse_unit).transpose()
    }

    /// Geometry as read from the XYZ file.
    pub fn molecule(&self) -> Result<Molecule, CliError> {
        let path = self
            .geometry
            .as_ref()
            .ok_or_else(|| CliError::Config("no geometry given".into()))?;
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut mol = Molecule::from_xyz_with_units(&text, self.length_unit()?)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        if self.charge != 0 {
            mol = Molecule::new(mol.atoms, self.charge).map_err(|e| CliError::Config(e.to_string()))?;
        }
        Ok(mol)
    }

    /// Scan grid values in bohr.
    pub fn grid_bohr(&self) -> Result<Vec<f64>, CliError> {
        let scale = self.length_unit()?.unwrap_or(LengthUnit::Angstrom).to_bohr();
        Ok(self.scan.as_ref().map(|s| s.grid.iter().map(|v| v * scale).collect()).unwrap_or_default())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configuration serializes")
    }
}

fn parse_unit(s: &str) -> Result<LengthUnit, CliError> {
    LengthUnit::parse(s).ok_or_else(|| CliError::Config(format!("units: unknown length unit `{s}`")))
}
