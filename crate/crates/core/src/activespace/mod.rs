//! Initial active orbital sets: occupied Hartree–Fock orbitals plus
//! diagonal-pair MP2 natural orbitals, with optional frozen core.

mod guess;
mod pno;

pub use guess::{guess_virtuals, DIFFUSE_EXPONENT, GUESS_DEPENDENCE};
pub use pno::{diagonal_mp2_pnos, mp2_integrals, Mp2Integrals, PairPnos, PnoResult, MIN_DENOMINATOR};

use crate::greenop::{self, GreenError};
use crate::mra::{FunctionTree, MraError};
use crate::scf::{self, ScfError, ScfResult};
use crate::secondq::IntegralTensors;
use thiserror::Error;

/// PNOs with occupation at or below this are dropped by default.
pub const DEFAULT_OCCUPATION_CUTOFF: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ActiveSpaceError {
    #[error("invalid active space: {0}")]
    Invalid(String),
    #[error("every guess virtual is linearly dependent on the occupied space")]
    AllDependent,
    #[error("MP2 denominator {value:e} for pair {pair} is too small; apply a level shift")]
    SmallDenominator { pair: usize, value: f64 },
    #[error("only {available} PNOs available, {requested} requested")]
    TooFewPnos { available: usize, requested: usize },
    #[error(transparent)]
    Mra(#[from] MraError),
    #[error(transparent)]
    Scf(#[from] ScfError),
    #[error(transparent)]
    Green(#[from] GreenError),
}

#[derive(Debug, Clone)]
pub struct ActiveSpace {
    pub n_elec: usize,
    /// active spatial orbitals: occupied first, then PNOs grouped by parent pair
    pub orbitals: Vec<FunctionTree>,
    /// 2 for occupied orbitals, MP2 PNO occupations for the rest
    pub occupations: Vec<f64>,
    pub frozen: Vec<FunctionTree>,
    /// pair groups for SPA circuits (indices into `orbitals`)
    pub groups: Vec<Vec<usize>>,
}

impl ActiveSpace {
    pub fn n_spatial(&self) -> usize {
        self.orbitals.len()
    }

    pub fn n_qubits(&self) -> usize {
        2 * self.orbitals.len()
    }

    /// `(N_e,N_q)`.
    pub fn label(&self) -> String {
        format!("({},{})", self.n_elec, self.n_qubits())
    }

    /// Frozen core followed by active orbitals.
    pub fn all_orbitals(&self) -> Vec<FunctionTree> {
        self.frozen.iter().chain(&self.orbitals).cloned().collect()
    }

    /// Checks orthonormality of the active and frozen orbitals.
    pub fn validate(&self) -> Result<(), ActiveSpaceError> {
        if self.n_elec % 2 != 0 {
            return Err(ActiveSpaceError::Invalid(format!("odd electron count {}", self.n_elec)));
        }
        let err = scf::orthonormality_error(&self.all_orbitals())?;
        if err > 1e-6 {
            return Err(ActiveSpaceError::Invalid(format!("orbitals not orthonormal ({err:e})")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActiveSpaceOptions {
    /// active electrons; default: all electrons outside `n_frozen` core orbitals
    pub n_elec: Option<usize>,
    /// active qubits `2 × (active spatial orbitals)`; default: all PNOs above the cutoff
    pub n_qubits: Option<usize>,
    /// core orbitals frozen when `n_elec` is not given
    pub n_frozen: usize,
    pub cutoff: f64,
    /// number of guess virtuals; default: all candidates
    pub n_guess: Option<usize>,
}

impl Default for ActiveSpaceOptions {
    fn default() -> Self {
        Self {
            n_elec: None,
            n_qubits: None,
            n_frozen: 0,
            cutoff: DEFAULT_OCCUPATION_CUTOFF,
            n_guess: None,
        }
    }
}

/// Occupied HF orbitals plus MP2 PNOs.
pub fn build_active_space(hf: &ScfResult, opts: &ActiveSpaceOptions) -> Result<ActiveSpace, ActiveSpaceError> {
    let occ = &hf.orbitals;
    let n_occ = occ.len();
    let n_frozen = match opts.n_elec {
        Some(ne) => {
            if ne % 2 != 0 || ne == 0 || ne / 2 > n_occ {
                return Err(ActiveSpaceError::Invalid(format!(
                    "{ne} active electrons with {n_occ} occupied orbitals"
                )));
            }
            n_occ - ne / 2
        }
        None => opts.n_frozen,
    };
    if n_frozen >= n_occ {
        return Err(ActiveSpaceError::Invalid(format!("{n_frozen} frozen of {n_occ} occupied orbitals")));
    }
    let n_act_occ = n_occ - n_frozen;
    let n_virt = match opts.n_qubits {
        Some(nq) => {
            if nq % 2 != 0 || nq / 2 < n_act_occ {
                return Err(ActiveSpaceError::Invalid(format!("{nq} qubits for {n_act_occ} occupied orbitals")));
            }
            Some(nq / 2 - n_act_occ)
        }
        None => None,
    };
    let centres: Vec<[f64; 3]> = hf.potential.molecule().atoms.iter().map(|a| a.position).collect();
    let n_guess = opts.n_guess.unwrap_or(7 * n_occ + centres.len());
    let cfg = occ[0].config();
    let mut orbitals: Vec<FunctionTree> = occ[n_frozen..].to_vec();
    let mut occupations = vec![2.0; n_act_occ];
    let mut groups: Vec<Vec<usize>> = (0..n_act_occ).map(|i| vec![i]).collect();
    if n_virt != Some(0) {
        let virt = guess_virtuals(occ, n_guess, &centres)?;
        let poisson = greenop::coulomb_operator(cfg.half_width, cfg.thresh)?;
        let correlated: Vec<usize> = (n_frozen..n_occ).collect();
        let ints = mp2_integrals(occ, &correlated, &virt, hf.potential.tree(), &poisson)?;
        let cutoff = if n_virt.is_some() { 0.0 } else { opts.cutoff };
        let pnos = diagonal_mp2_pnos(&ints, cutoff, n_virt)?;
        if let Some(req) = n_virt {
            if pnos.merged_occupations.len() < req {
                return Err(ActiveSpaceError::TooFewPnos {
                    available: pnos.merged_occupations.len(),
                    requested: req,
                });
            }
        }
        for (orb, (&o, &parent)) in pnos
            .orbitals(&virt)?
            .into_iter()
            .zip(pnos.merged_occupations.iter().zip(&pnos.parent))
        {
            groups[parent].push(orbitals.len());
            orbitals.push(orb.truncated());
            occupations.push(o);
        }
        log::info!(
            "PNOs: occupations {:?}, MP2 pair energies {:?}",
            pnos.merged_occupations,
            pnos.pair_energies
        );
    }
    let frozen: Vec<FunctionTree> = occ[..n_frozen].to_vec();
    // clean up truncation drift over the full set, keeping the core first
    let all = scf::loewdin_orthonormalize(&frozen.iter().chain(&orbitals).cloned().collect::<Vec<_>>())?;
    let (frozen, orbitals) = (all[..n_frozen].to_vec(), all[n_frozen..].to_vec());
    let space = ActiveSpace {
        n_elec: 2 * n_act_occ,
        orbitals,
        occupations,
        frozen,
        groups,
    };
    space.validate()?;
    Ok(space)
}

/// Folds doubly occupied `core` orbitals into the one-body operator of the
/// `active` orbitals: `h'_kl = h_kl + Σ_c (2⟨kc|lc⟩ − ⟨kc|cl⟩)` and
/// `E_core = Σ_c 2h_cc + Σ_cd (2⟨cd|cd⟩ − ⟨cd|dc⟩)`, added to `e_const`.
pub fn freeze_core(t: &IntegralTensors, core: &[usize], active: &[usize]) -> Result<IntegralTensors, ActiveSpaceError> {
    if let Some(c) = core.iter().find(|c| active.contains(c)) {
        return Err(ActiveSpaceError::Invalid(format!("orbital {c} is both core and active")));
    }
    let mut out = t.subset(active);
    let mut e_core = 0.0;
    for &c in core {
        e_core += 2.0 * t.h()[(c, c)];
        for &d in core {
            e_core += 2.0 * t.g(c, d, c, d) - t.g(c, d, d, c);
        }
    }
    for (a, &k) in active.iter().enumerate() {
        for (b, &l) in active.iter().enumerate() {
            let v: f64 = core.iter().map(|&c| 2.0 * t.g(k, c, l, c) - t.g(k, c, c, l)).sum();
            out.h_mut()[(a, b)] += v;
        }
    }
    out.e_const += e_core;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wfn::fci;

    #[test]
    fn empty_core_is_identity() {
        let t = IntegralTensors::random(3, 2);
        let f = freeze_core(&t, &[], &[0, 1, 2]).unwrap();
        assert_eq!(f, t);
    }

    #[test]
    fn one_orbital_core_without_interaction() {
        let mut t = IntegralTensors::random(2, 3);
        t.scale_two_body(0.0);
        let f = freeze_core(&t, &[0], &[1]).unwrap();
        assert_eq!(f.e_const, t.e_const + 2.0 * t.h()[(0, 0)]);
    }

    #[test]
    fn frozen_core_fci_matches_determinant_oracle() {
        // oracle: FCI over determinants of the full space with orbital 0
        // doubly occupied in every determinant
        use crate::wfn::sector::SectorBasis;
        use crate::wfn::{lowest_eigenpair, sector_hamiltonian_dense};
        let t = IntegralTensors::random(3, 8);
        let f = freeze_core(&t, &[0], &[1, 2]).unwrap();
        let e_fc = fci(&f, 2).unwrap().energy;
        let basis = SectorBasis::new(3, 4).unwrap();
        let h = sector_hamiltonian_dense(&t, &basis);
        let keep: Vec<usize> = (0..basis.dim()).filter(|&i| basis.states()[i] & 0b11 == 0b11).collect();
        let sub = nalgebra::DMatrix::from_fn(keep.len(), keep.len(), |i, j| h[(keep[i], keep[j])]);
        let (e_oracle, _) = lowest_eigenpair(&sub);
        assert!((e_fc - e_oracle).abs() < 1e-10, "{e_fc} vs {e_oracle}");
    }
}
