//! Coupling potentials and the Green's-operator orbital update at fixed
//! density matrices.

use super::natural::multipliers;
use super::RefineError;
use crate::secondq::compute_integrals;
use crate::greenop::{self, SeparatedKernel};
use crate::mra::FunctionTree;
use crate::scf::ops::{self, product};
use crate::scf::{orthonormality_error, orthonormalize, KainHistory, OrbitalSet, Orthonormalization};
use crate::wfn::SpinSummedRdms;
use nalgebra::DMatrix;
use std::collections::HashMap;

/// Two-body density entries below this are skipped in the update.
const D2_SKIP: f64 = 1e-14;
/// Largest `‖S − I‖_max` tolerated after reorthonormalization.
const ORTHONORMALITY_LIMIT: f64 = 1e-6;

/// `g_l^n = Poisson ∗ (φ_l φ_n)` keyed by `(min, max)`.
pub type CouplingPotentials = HashMap<(usize, usize), FunctionTree>;

/// Coupling potentials for every pair `(l, n)` that carries two-body density.
pub fn coupling_potentials(
    orbs: &[FunctionTree],
    rdms: &SpinSummedRdms,
    poisson: &SeparatedKernel,
) -> Result<CouplingPotentials, RefineError> {
    let n = orbs.len();
    let mut needed = vec![false; n * n];
    for k in 0..n {
        for l in 0..n {
            for m in 0..n {
                for nn in 0..n {
                    if rdms.d2(k, l, m, nn).abs() > D2_SKIP {
                        needed[l.min(nn) * n + l.max(nn)] = true;
                    }
                }
            }
        }
    }
    let mut out = HashMap::new();
    for l in 0..n {
        for nn in l..n {
            if needed[l * n + nn] {
                let pot = greenop::apply(poisson, &product(&orbs[l], &orbs[nn]))?;
                out.insert((l, nn), pot);
            }
        }
    }
    Ok(out)
}

/// Right-hand side of the orbital equation for orbital `i` (before `−2G_κ`):
/// `V φ_i − (1/n_i) Σ_{k≠i} ε[k, i] φ_k + (1/n_i) Σ_{lmn} D2[i, l, m, n] g_l^n φ_m`.
pub fn update_rhs(
    i: usize,
    orbs: &[FunctionTree],
    rdms: &SpinSummedRdms,
    eps: &DMatrix<f64>,
    vnuc: &FunctionTree,
    pots: &CouplingPotentials,
) -> Result<FunctionTree, RefineError> {
    let n = orbs.len();
    let ni = rdms.d1[(i, i)];
    // collect Σ_ln D2[i,l,m,n] g_l^n for each m as one potential
    let mut owned: Vec<(f64, FunctionTree)> = vec![(1.0, product(vnuc, &orbs[i]))];
    for m in 0..n {
        let mut terms: Vec<(f64, &FunctionTree)> = Vec::new();
        for l in 0..n {
            for nn in 0..n {
                let d = rdms.d2(i, l, m, nn);
                if d.abs() > D2_SKIP {
                    let pot = pots
                        .get(&(l.min(nn), l.max(nn)))
                        .ok_or_else(|| RefineError::Shape(format!("missing coupling potential ({l},{nn})")))?;
                    terms.push((d / ni, pot));
                }
            }
        }
        if !terms.is_empty() {
            let w = FunctionTree::linear_combination(&terms)?.truncated();
            owned.push((1.0, product(&w, &orbs[m])));
        }
    }
    for k in 0..n {
        if k != i && eps[(k, i)] != 0.0 {
            owned.push((-eps[(k, i)] / ni, orbs[k].clone()));
        }
    }
    let refs: Vec<(f64, &FunctionTree)> = owned.iter().map(|(c, f)| (*c, f)).collect();
    Ok(FunctionTree::linear_combination(&refs)?.truncated())
}

/// `κ_i = √(max(−2 ε[i, i]/n_i, κ_min²))`, with the clamp flagged.
pub fn kappa(eps_ii: f64, n_i: f64) -> (f64, bool) {
    ops::bsh_kappa(eps_ii / n_i)
}

/// One application of the update to the orbitals in `refined`; the others
/// are returned unchanged. No orthonormalization.
pub fn orbital_update(
    orbs: &[FunctionTree],
    rdms: &SpinSummedRdms,
    eps: &DMatrix<f64>,
    vnuc: &FunctionTree,
    poisson: &SeparatedKernel,
    refined: &[usize],
    cutoff: f64,
) -> Result<Vec<FunctionTree>, RefineError> {
    for &i in refined {
        let ni = rdms.d1[(i, i)];
        if ni <= cutoff {
            return Err(RefineError::LowOccupation { orbital: i, occupation: ni });
        }
    }
    let pots = coupling_potentials(orbs, rdms, poisson)?;
    let mut out = orbs.to_vec();
    for &i in refined {
        let rhs = update_rhs(i, orbs, rdms, eps, vnuc, &pots)?;
        let (k, clamped) = kappa(eps[(i, i)], rdms.d1[(i, i)]);
        if clamped {
            log::warn!(
                "orbital {i}: ε/n = {:.6} is not negative; κ clamped to {k}",
                eps[(i, i)] / rdms.d1[(i, i)]
            );
        }
        out[i] = ops::bsh_step(k, &rhs)?;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MicroOptions {
    pub tol: f64,
    pub max_iterations: usize,
    pub kain_size: usize,
    pub cutoff: f64,
    pub orthonormalization: Orthonormalization,
    /// recompute the multipliers from the current orbitals in every pass
    pub update_multipliers: bool,
}

#[derive(Debug, Clone)]
pub struct MicroResult {
    pub orbitals: Vec<FunctionTree>,
    /// `max_i ‖φ_i' − φ_i‖` per micro-iteration
    pub residuals: Vec<f64>,
    pub converged: bool,
}

/// Micro-iterations at fixed densities and multipliers: update, KAIN over
/// the refined orbitals, reorthonormalize the whole set.
pub fn refine_orbitals(
    orbs: &[FunctionTree],
    rdms: &SpinSummedRdms,
    eps: &DMatrix<f64>,
    vnuc: &FunctionTree,
    poisson: &SeparatedKernel,
    refined: &[usize],
    opts: &MicroOptions,
) -> Result<MicroResult, RefineError> {
    let mut cur = orbs.to_vec();
    let mut kain: KainHistory<OrbitalSet> = KainHistory::new(opts.kain_size);
    kain.max_step = Some(0.5);
    let mut residuals = Vec::new();
    if refined.is_empty() {
        return Ok(MicroResult {
            orbitals: cur,
            residuals,
            converged: true,
        });
    }
    let mut eps = eps.clone();
    for it in 0..opts.max_iterations {
        if opts.update_multipliers && it > 0 {
            let t = compute_integrals(&cur, vnuc, poisson, 0.0)?;
            eps = multipliers(&t, rdms)?;
        }
        let upd = orbital_update(&cur, rdms, &eps, vnuc, poisson, refined, opts.cutoff)?;
        let x: Vec<FunctionTree> = refined.iter().map(|&i| cur[i].clone()).collect();
        let f: Vec<FunctionTree> = refined
            .iter()
            .map(|&i| FunctionTree::add(&upd[i], &cur[i], 1.0, -1.0).map(|d| d.truncated()))
            .collect::<Result<_, _>>()?;
        let norms: Vec<f64> = f.iter().map(|d| d.norm2()).collect();
        log::debug!("micro-iteration {it}: per-orbital residuals {norms:.3?}");
        let res = norms.iter().copied().fold(0.0, f64::max);
        let stepped = kain.update(OrbitalSet(x), OrbitalSet(f)).0;
        let mut next = cur.clone();
        for (&i, s) in refined.iter().zip(stepped) {
            next[i] = s;
        }
        // truncated before orthonormalization so that the set stays orthonormal
        let next: Vec<FunctionTree> = next.into_iter().map(|t| t.truncated()).collect();
        let next = orthonormalize(&next, opts.orthonormalization)?;
        let s_err = orthonormality_error(&next)?;
        if s_err > ORTHONORMALITY_LIMIT {
            log::warn!("micro-iteration {it}: ‖S − I‖_max = {s_err:.2e} after orthonormalization");
        }
        let change = next
            .iter()
            .zip(&cur)
            .map(|(a, b)| FunctionTree::add(a, b, 1.0, -1.0).map(|d| d.norm2()))
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .fold(0.0, f64::max);
        log::info!("micro-iteration {it}: residual {res:.3e}, change {change:.3e}");
        residuals.push(res);
        cur = next;
        if res <= opts.tol {
            return Ok(MicroResult {
                orbitals: cur,
                residuals,
                converged: true,
            });
        }
    }
    Ok(MicroResult {
        orbitals: cur,
        residuals,
        converged: false,
    })
}
