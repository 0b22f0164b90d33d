//! Single-point pipeline: Hartree–Fock, PNO active space, macro-iterations
//! and an optional final solve with a different wavefunction.

use crate::config::RunConfig;
use crate::label::{BasisKind, MethodLabel};
use crate::CliError;
use mraqc::activespace::{build_active_space, ActiveSpaceOptions};
use mraqc::refine::{macro_iterate, natural_transform, solve, RefineProblem};
use mraqc::scf::{element_symbol, hartree_fock, Molecule, ScfOptions};
use serde::Serialize;
use std::path::Path;
use std::time::Instant;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AtomRecord {
    pub symbol: String,
    /// bohr
    pub position: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRecord {
    /// scanned coordinate name and value (bohr), when part of a scan
    pub coordinate: Option<(String, f64)>,
    pub atoms: Vec<AtomRecord>,
    pub label: String,
    pub hf_energy: f64,
    /// total energy after each macro-iteration's solve
    pub macro_energies: Vec<f64>,
    pub energy: f64,
    /// natural occupations of the final state, descending
    pub occupations: Vec<f64>,
    pub wall_time: f64,
}

pub fn atoms_of(mol: &Molecule) -> Vec<AtomRecord> {
    mol.atoms
        .iter()
        .map(|a| AtomRecord {
            symbol: element_symbol(a.z).to_string(),
            position: a.position,
        })
        .collect()
}

/// Runs the full pipeline for one geometry, writing per-iteration artifacts
/// and `result.json` to `out_dir`.
pub fn run_point(cfg: &RunConfig, mol: &Molecule, out_dir: &Path) -> Result<ResultRecord, CliError> {
    let start = Instant::now();
    let mra = cfg.mra_config();
    mol.check_in_box(mra.half_width).map_err(|e| CliError::Config(e.to_string()))?;
    std::fs::create_dir_all(out_dir)?;
    let solver = cfg.solver.to_spec()?;
    let final_solver = cfg.final_solver.as_ref().map(|f| f.to_spec()).transpose()?;
    let rcfg = cfg.refine.to_refine_config()?;

    let hf = hartree_fock(mol, &mra, &ScfOptions::default()).map_err(|e| CliError::Numerical(e.to_string()))?;
    log::info!("Hartree–Fock energy {:.10}", hf.energy);
    let mut aopts = ActiveSpaceOptions {
        n_elec: cfg.active.electrons,
        n_qubits: cfg.active.qubits,
        n_frozen: cfg.active.frozen_core,
        ..ActiveSpaceOptions::default()
    };
    if let Some(c) = cfg.active.occupation_cutoff {
        aopts.cutoff = c;
    }
    let space = build_active_space(&hf, &aopts).map_err(|e| CliError::Numerical(e.to_string()))?;
    log::info!("active space {} with PNO occupations {:?}", space.label(), space.occupations);

    let problem = RefineProblem {
        space: &space,
        vnuc: hf.potential.tree(),
        nuclear_repulsion: hf.nuclear_repulsion,
    };
    let state = macro_iterate(problem, &solver, &rcfg, Some(out_dir)).map_err(|e| CliError::Numerical(e.to_string()))?;

    let mut energy = state.energy();
    let mut occupations = state.occupations().to_vec();
    let mut wfn = solver.label().to_string();
    let mut refined_with = None;
    if let Some(fs) = final_solver.filter(|f| *f != solver) {
        let out = solve(&state.integrals, space.n_elec, &fs, state.groups.as_deref(), None)
            .map_err(|e| CliError::Numerical(e.to_string()))?;
        energy = out.energy;
        occupations = natural_transform(&out.rdms.d1).occupations;
        refined_with = (state.iterations() > 0).then(|| wfn.clone());
        wfn = fs.label().to_string();
    }
    let refined = state.iterations() > 0;
    let label = MethodLabel {
        wfn,
        basis: if refined { BasisKind::Mra } else { BasisKind::Pno },
        n_elec: space.n_elec,
        n_qubits: space.n_qubits(),
        opt: if refined { rcfg.opt_count } else { None },
        it: refined.then(|| state.iterations()),
        refined_with,
    };
    let record = ResultRecord {
        coordinate: None,
        atoms: atoms_of(mol),
        label: label.to_string(),
        hf_energy: hf.energy,
        macro_energies: state.energies(),
        energy,
        occupations,
        wall_time: start.elapsed().as_secs_f64(),
    };
    write_json(&out_dir.join("result.json"), &record)?;
    Ok(record)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Numerical(e.to_string()))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}
