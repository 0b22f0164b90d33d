//! Closed-shell Hartree–Fock by the bound-state Helmholtz fixed-point iteration.

use super::kain::{KainHistory, OrbitalSet};
use super::molecule::Molecule;
use super::ops::{self, product};
use super::orthonormal::{self, Orthonormalization};
use super::potential::SmoothedNuclearPotential;
use super::ScfError;
use crate::greenop::{self, SeparatedKernel};
use crate::mra::{FunctionTree, MraConfig};
use nalgebra::DMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct ScfOptions {
    /// convergence threshold on `max_i ‖Δφ_i‖₂`
    pub tol: f64,
    pub max_iterations: usize,
    /// KAIN subspace size (1 = plain iteration)
    pub kain_size: usize,
    /// single electron in one orbital, no two-body terms
    pub one_electron: bool,
    pub orthonormalization: Orthonormalization,
    /// largest orbital-set step taken by KAIN
    pub max_step: f64,
}

impl Default for ScfOptions {
    fn default() -> Self {
        Self {
            tol: 1e-4,
            max_iterations: 40,
            kain_size: 3,
            one_electron: false,
            orthonormalization: Orthonormalization::Loewdin,
            max_step: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScfIteration {
    pub iteration: usize,
    pub energy: f64,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct ScfResult {
    /// canonical occupied orbitals, ascending orbital energy
    pub orbitals: Vec<FunctionTree>,
    pub orbital_energies: Vec<f64>,
    pub energy: f64,
    pub nuclear_repulsion: f64,
    pub trace: Vec<ScfIteration>,
    pub potential: SmoothedNuclearPotential,
    pub one_electron: bool,
}

/// Atom-centred starting functions: exponents `0.5 Z²` and a diffuse `0.1`.
pub fn guess_functions(mol: &Molecule, cfg: &MraConfig) -> Result<Vec<FunctionTree>, ScfError> {
    let mut out = Vec::new();
    for a in &mol.atoms {
        for alpha in [0.5 * (a.z * a.z) as f64, 0.1] {
            out.push(FunctionTree::project(ops::gaussian(alpha, a.position), cfg, 3)?);
        }
    }
    Ok(out)
}

/// Lowest `n` eigenvectors of the core Hamiltonian in the Löwdin-orthonormalized guess space.
pub fn core_guess(
    mol: &Molecule,
    cfg: &MraConfig,
    vnuc: &FunctionTree,
    n: usize,
) -> Result<Vec<FunctionTree>, ScfError> {
    let guesses = orthonormal::loewdin_orthonormalize(&guess_functions(mol, cfg)?)?;
    if guesses.len() < n {
        return Err(ScfError::InvalidMolecule(format!(
            "{n} occupied orbitals exceed the {} guess functions",
            guesses.len()
        )));
    }
    let t = ops::kinetic_matrix(&guesses);
    let vphi: Vec<FunctionTree> = guesses.iter().map(|g| product(vnuc, g)).collect();
    let h = symmetrize(&(t + ops::matrix_elements(&guesses, &vphi)));
    let eig = h.symmetric_eigen();
    let order = sorted_indices(eig.eigenvalues.as_slice());
    let u = DMatrix::from_fn(guesses.len(), n, |i, j| eig.eigenvectors[(i, order[j])]);
    let orbs: Vec<FunctionTree> = orthonormal::transform_orbitals(&guesses, &u)?
        .into_iter()
        .map(|f| f.truncated())
        .collect();
    Ok(orthonormal::loewdin_orthonormalize(&orbs)?)
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

pub fn sorted_indices(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap().then(a.cmp(&b)));
    idx
}

/// Fock-operator pieces at fixed orbitals.
pub struct FockBuild {
    /// `V φ_i` (nuclear + Coulomb − exchange)
    pub vphi: Vec<FunctionTree>,
    pub hcore: DMatrix<f64>,
    pub fock: DMatrix<f64>,
}

/// Builds `Vφ_i`, `h` and `F` for a closed-shell determinant (or the
/// single-electron case when `one_electron`).
pub fn fock_build(
    orbs: &[FunctionTree],
    vnuc: &FunctionTree,
    poisson: &SeparatedKernel,
    one_electron: bool,
) -> Result<FockBuild, ScfError> {
    let n = orbs.len();
    let t = ops::kinetic_matrix(orbs);
    let vnuc_phi: Vec<FunctionTree> = orbs.iter().map(|p| product(vnuc, p)).collect();
    let hcore = symmetrize(&(&t + ops::matrix_elements(orbs, &vnuc_phi)));
    if one_electron {
        return Ok(FockBuild {
            vphi: vnuc_phi,
            fock: hcore.clone(),
            hcore,
        });
    }
    let pairs = ops::pair_potentials(orbs, poisson)?;
    // Coulomb potential of the total density: Σ_k 2 g_k^k
    let mut vj = ops::pair(&pairs, 0, 0).scaled(2.0);
    for k in 1..n {
        vj = FunctionTree::add(&vj, ops::pair(&pairs, k, k), 1.0, 2.0)?;
    }
    let vj = vj.truncated();
    let mut vphi = Vec::with_capacity(n);
    for i in 0..n {
        let mut terms = vec![(1.0, vnuc_phi[i].clone()), (1.0, product(&vj, &orbs[i]))];
        for k in 0..n {
            terms.push((-1.0, product(ops::pair(&pairs, i, k), &orbs[k])));
        }
        let refs: Vec<(f64, &FunctionTree)> = terms.iter().map(|(c, f)| (*c, f)).collect();
        vphi.push(FunctionTree::linear_combination(&refs)?.truncated());
    }
    let fock = symmetrize(&(&t + ops::matrix_elements(orbs, &vphi)));
    Ok(FockBuild { vphi, hcore, fock })
}

/// Energy of a closed-shell determinant from `h` and `F`: `Σ_i (h_ii + F_ii)`.
pub fn determinant_energy(b: &FockBuild, one_electron: bool) -> f64 {
    if one_electron {
        b.hcore[(0, 0)]
    } else {
        (0..b.fock.nrows()).map(|i| b.hcore[(i, i)] + b.fock[(i, i)]).sum()
    }
}

/// One BSH update of every orbital: `φ̃_i = −2 G_{κ_i}[Vφ_i − Σ_{j≠i} F_ij φ_j]`.
pub fn bsh_update(orbs: &[FunctionTree], b: &FockBuild) -> Result<Vec<FunctionTree>, ScfError> {
    let n = orbs.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut terms: Vec<(f64, &FunctionTree)> = vec![(1.0, &b.vphi[i])];
        for j in 0..n {
            if j != i && b.fock[(i, j)] != 0.0 {
                terms.push((-b.fock[(i, j)], &orbs[j]));
            }
        }
        let rhs = FunctionTree::linear_combination(&terms)?.truncated();
        let (kappa, clamped) = ops::bsh_kappa(b.fock[(i, i)]);
        if clamped {
            log::warn!("orbital {i}: non-negative energy {:.6}; κ clamped to {kappa}", b.fock[(i, i)]);
        }
        out.push(ops::bsh_step(kappa, &rhs)?);
    }
    Ok(out)
}

/// Closed-shell (or single-electron) Hartree–Fock.
pub fn hartree_fock(mol: &Molecule, cfg: &MraConfig, opts: &ScfOptions) -> Result<ScfResult, ScfError> {
    let potential = SmoothedNuclearPotential::new(mol, cfg)?;
    hartree_fock_with_potential(mol, cfg, opts, potential)
}

pub fn hartree_fock_with_potential(
    mol: &Molecule,
    cfg: &MraConfig,
    opts: &ScfOptions,
    potential: SmoothedNuclearPotential,
) -> Result<ScfResult, ScfError> {
    let n_occ = if opts.one_electron {
        1
    } else {
        if !mol.is_closed_shell() {
            return Err(ScfError::OpenShell(mol.num_electrons()));
        }
        mol.num_electrons() / 2
    };
    let vnuc = potential.tree().clone();
    let poisson = greenop::coulomb_operator(cfg.half_width, cfg.thresh)?;
    let e_nuc = mol.nuclear_repulsion();
    let mut orbs = core_guess(mol, cfg, &vnuc, n_occ)?;
    let mut kain: KainHistory<OrbitalSet> = KainHistory::new(opts.kain_size);
    kain.max_step = Some(opts.max_step);
    let mut trace = Vec::new();
    let mut residual = f64::INFINITY;
    for iteration in 0..=opts.max_iterations {
        let build = fock_build(&orbs, &vnuc, &poisson, opts.one_electron)?;
        let energy = determinant_energy(&build, opts.one_electron) + e_nuc;
        if let Some(prev) = trace.last().map(|t: &ScfIteration| t.energy) {
            if iteration > 3 && energy > prev + 1e-6 {
                log::warn!("HF energy rose by {:.2e} at iteration {iteration}", energy - prev);
            }
        }
        log::info!("HF iteration {iteration}: E = {energy:.10}, residual {residual:.3e}");
        trace.push(ScfIteration {
            iteration,
            energy,
            residual,
        });
        if residual <= opts.tol {
            return finish(orbs, build, energy, e_nuc, trace, potential, opts.one_electron);
        }
        if iteration == opts.max_iterations {
            break;
        }
        let updated = bsh_update(&orbs, &build)?;
        let res: Vec<FunctionTree> = updated
            .iter()
            .zip(&orbs)
            .map(|(u, o)| FunctionTree::add(u, o, 1.0, -1.0).map(|d| d.truncated()))
            .collect::<Result<_, _>>()?;
        residual = res.iter().map(|r| r.norm2()).fold(0.0, f64::max);
        let next = kain.update(OrbitalSet(orbs), OrbitalSet(res)).0;
        orbs = orthonormal::orthonormalize(&next, opts.orthonormalization)?
            .into_iter()
            .map(|f| f.truncated())
            .collect();
        if opts.one_electron {
            orbs = vec![orbs[0].scaled(1.0 / orbs[0].norm2())];
        }
    }
    Err(ScfError::NotConverged {
        iterations: opts.max_iterations,
        residual,
        trace: trace.iter().map(|t| t.energy).collect(),
    })
}

fn finish(
    orbs: Vec<FunctionTree>,
    build: FockBuild,
    energy: f64,
    e_nuc: f64,
    trace: Vec<ScfIteration>,
    potential: SmoothedNuclearPotential,
    one_electron: bool,
) -> Result<ScfResult, ScfError> {
    // canonical orbitals
    let eig = build.fock.clone().symmetric_eigen();
    let order = sorted_indices(eig.eigenvalues.as_slice());
    let n = orbs.len();
    let mut u = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    // sign convention: largest coefficient positive
    for j in 0..n {
        let col = u.column(j);
        let imax = (0..n).max_by(|&a, &b| col[a].abs().partial_cmp(&col[b].abs()).unwrap()).unwrap();
        if col[imax] < 0.0 {
            u.column_mut(j).scale_mut(-1.0);
        }
    }
    let orbitals = orthonormal::transform_orbitals(&orbs, &u)?;
    Ok(ScfResult {
        orbitals,
        orbital_energies: order.iter().map(|&i| eig.eigenvalues[i]).collect(),
        energy,
        nuclear_repulsion: e_nuc,
        trace,
        potential,
        one_electron,
    })
}
