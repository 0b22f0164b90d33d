use super::embed::embed_frozen_core;
use super::natural::{asymmetry, multipliers, natural_transform, to_natural_orbitals};
use super::solve::{solve, SolverSpec};
use super::update::refine_orbitals;
use super::{RefineConfig, RefineError};
use crate::activespace::{freeze_core, ActiveSpace};
use crate::greenop;
use crate::mra::FunctionTree;
use crate::secondq::{compute_integrals, write_fcidump, IntegralTensors};
use crate::wfn::SpinSummedRdms;
use nalgebra::DMatrix;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Energies may rise by at most this between macro-iterations before a
/// warning is logged.
const MONOTONICITY_SLACK: f64 = 1e-5;

/// Fixed inputs of a refinement run.
#[derive(Debug, Clone, Copy)]
pub struct RefineProblem<'a> {
    pub space: &'a ActiveSpace,
    pub vnuc: &'a FunctionTree,
    pub nuclear_repulsion: f64,
}

/// One macro-iteration: the solve in the current orbitals and the
/// refinement step that followed it (if any).
#[derive(Debug, Clone, PartialEq)]
pub struct MacroRecord {
    pub iteration: usize,
    /// total energy recomputed from the densities
    pub energy: f64,
    pub solver_energy: f64,
    /// natural occupations, descending
    pub occupations: Vec<f64>,
    /// `max_i ‖φ_i' − φ_i‖` over all orbitals (NaN when no refinement followed)
    pub orbital_change: f64,
    /// `‖ε − εᵀ‖_max` (NaN when no refinement followed)
    pub eps_asymmetry: f64,
    pub micro_iterations: usize,
    /// active indices (in natural-orbital order) that were refined
    pub refined: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct MacroState {
    /// active orbitals of the last solve
    pub orbitals: Vec<FunctionTree>,
    pub frozen: Vec<FunctionTree>,
    /// densities of the last solve, in the basis of `orbitals`
    pub rdms: SpinSummedRdms,
    /// frozen-core active-space integrals of the last solve
    pub integrals: IntegralTensors,
    pub history: Vec<MacroRecord>,
    pub fcidump_paths: Vec<PathBuf>,
    /// last optimal circuit parameters (VQE only)
    pub theta: Option<Vec<f64>>,
    pub groups: Option<Vec<Vec<usize>>>,
    /// whether the energy change fell below the macro threshold
    pub converged: bool,
}

impl MacroState {
    pub fn energy(&self) -> f64 {
        self.history.last().map_or(f64::NAN, |r| r.energy)
    }

    pub fn energies(&self) -> Vec<f64> {
        self.history.iter().map(|r| r.energy).collect()
    }

    pub fn occupations(&self) -> &[f64] {
        self.history.last().map_or(&[], |r| &r.occupations)
    }

    /// Number of refinement steps taken (`it` in method labels).
    pub fn iterations(&self) -> usize {
        self.history.len().saturating_sub(1)
    }
}

fn with_context<T>(iteration: usize, r: Result<T, RefineError>) -> Result<T, RefineError> {
    r.map_err(|e| RefineError::Macro {
        iteration,
        source: Box::new(e),
    })
}

/// Relabels pair groups after a natural-orbital rotation; `None` when the
/// relabelled groups no longer have one reference orbital each.
fn remap_groups(groups: &[Vec<usize>], u: &DMatrix<f64>, n_pairs: usize) -> Option<Vec<Vec<usize>>> {
    let n = u.nrows();
    let target: Vec<usize> = (0..n).map(|i| u.row(i).transpose().iamax()).collect();
    let mut seen = vec![false; n];
    for &t in &target {
        if std::mem::replace(&mut seen[t], true) {
            return None;
        }
    }
    let out: Vec<Vec<usize>> = groups.iter().map(|g| g.iter().map(|&o| target[o]).collect()).collect();
    let valid = out.iter().all(|g| g.iter().filter(|&&o| o < n_pairs).count() == 1);
    valid.then_some(out)
}

fn write_energy_csv(dir: &Path, rec: &MacroRecord) -> Result<(), RefineError> {
    let mut s = String::from("iteration,energy,solver_energy,orbital_change,eps_asymmetry\n");
    let _ = writeln!(
        s,
        "{},{:.17e},{:.17e},{:.17e},{:.17e}",
        rec.iteration, rec.energy, rec.solver_energy, rec.orbital_change, rec.eps_asymmetry
    );
    std::fs::write(dir.join(format!("iter_{}.energy.csv", rec.iteration)), s)?;
    Ok(())
}

/// Alternates wavefunction solves with orbital refinement until the energy
/// change drops below `cfg.macro_tol` or `cfg.max_macro` refinement steps
/// have been taken. With `max_macro = 0` the result is the solve in the
/// initial orbitals.
pub fn macro_iterate(
    problem: RefineProblem<'_>,
    solver: &SolverSpec,
    cfg: &RefineConfig,
    out_dir: Option<&Path>,
) -> Result<MacroState, RefineError> {
    cfg.validate()?;
    let space = problem.space;
    space.validate()?;
    let vnuc = problem.vnuc;
    let poisson = greenop::coulomb_operator(vnuc.half_width(), vnuc.thresh())?;
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
    }
    let nc = space.frozen.len();
    let na = space.orbitals.len();
    let n_pairs = space.n_elec / 2;
    let core: Vec<usize> = (0..nc).collect();
    let act: Vec<usize> = (nc..nc + na).collect();

    let mut frozen = space.frozen.clone();
    let mut active = space.orbitals.clone();
    let mut groups = (!space.groups.is_empty()).then(|| space.groups.clone());
    let mut theta: Option<Vec<f64>> = None;
    let mut history: Vec<MacroRecord> = Vec::new();
    let mut paths = Vec::new();

    for m in 0.. {
        let all: Vec<FunctionTree> = frozen.iter().chain(&active).cloned().collect();
        let t_full = with_context(m, compute_integrals(&all, vnuc, &poisson, problem.nuclear_repulsion).map_err(Into::into))?;
        let t_act = with_context(m, freeze_core(&t_full, &core, &act).map_err(Into::into))?;
        if let Some(dir) = out_dir {
            let path = dir.join(format!("iter_{m}.fcidump"));
            with_context(m, write_fcidump(&t_act, space.n_elec, &path).map_err(Into::into))?;
            paths.push(path);
        }
        let out = with_context(m, solve(&t_act, space.n_elec, solver, groups.as_deref(), theta.as_deref()))?;
        let energy = t_act.energy(&out.rdms.d1, &out.rdms.d2);
        log::info!("macro-iteration {m}: E = {energy:.10} (solver {:.10})", out.energy);
        let prev = history.last().map(|r| r.energy);
        if let Some(p) = prev {
            if energy > p + MONOTONICITY_SLACK {
                log::warn!("macro-iteration {m}: energy rose by {:.3e}", energy - p);
            }
        }
        let mut rec = MacroRecord {
            iteration: m,
            energy,
            solver_energy: out.energy,
            occupations: natural_transform(&out.rdms.d1).occupations,
            orbital_change: f64::NAN,
            eps_asymmetry: f64::NAN,
            micro_iterations: 0,
            refined: Vec::new(),
        };
        let converged = prev.is_some_and(|p| (energy - p).abs() <= cfg.macro_tol);
        if converged || m >= cfg.max_macro {
            if let Some(dir) = out_dir {
                write_energy_csv(dir, &rec)?;
            }
            history.push(rec);
            return Ok(MacroState {
                orbitals: active,
                frozen,
                rdms: out.rdms,
                integrals: t_act,
                history,
                fcidump_paths: paths,
                theta: out.theta,
                groups,
                converged,
            });
        }

        // natural orbitals of the active space; the core is already diagonal
        let (no_orbs, no_rdms, tr) = with_context(m, to_natural_orbitals(&active, &out.rdms))?;
        let kept_groups = groups.clone();
        groups = groups.and_then(|g| remap_groups(&g, &tr.u, n_pairs));
        let mut u_full = DMatrix::identity(nc + na, nc + na);
        u_full.view_mut((nc, nc), (na, na)).copy_from(&tr.u);
        let full_rdms = embed_frozen_core(&no_rdms, nc);
        let eps = with_context(m, multipliers(&t_full.transform(&u_full), &full_rdms))?;
        rec.eps_asymmetry = asymmetry(&eps);

        let limit = cfg.opt_count.unwrap_or(na).min(na);
        let refined: Vec<usize> = (0..limit)
            .filter(|&j| tr.occupations[j] > cfg.occupation_cutoff)
            .map(|j| nc + j)
            .collect();
        let start: Vec<FunctionTree> = frozen.iter().cloned().chain(no_orbs).collect();
        let micro = with_context(
            m,
            refine_orbitals(&start, &full_rdms, &eps, vnuc, &poisson, &refined, &cfg.micro_options()),
        )?;
        if !micro.converged {
            log::warn!("macro-iteration {m}: micro-iterations stopped at residual {:?}", micro.residuals.last());
        }
        rec.orbital_change = micro
            .orbitals
            .iter()
            .zip(&start)
            .map(|(a, b)| FunctionTree::add(a, b, 1.0, -1.0).map(|d| d.norm2()))
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .fold(0.0, f64::max);
        rec.micro_iterations = micro.residuals.len();
        rec.refined = refined.iter().map(|&i| i - nc).collect();
        if let Some(dir) = out_dir {
            write_energy_csv(dir, &rec)?;
        }
        history.push(rec);
        if refined.is_empty() {
            // nothing moved: keep the solver's basis so that the next solve is identical
            groups = kept_groups;
        } else {
            let mut orbs = micro.orbitals;
            active = orbs.split_off(nc);
            frozen = orbs;
        }
        theta = out.theta;
    }
    unreachable!("the macro loop returns from inside")
}
