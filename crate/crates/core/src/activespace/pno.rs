//! Diagonal-pair MP2 pair natural orbitals.

use super::ActiveSpaceError;
use crate::greenop::{self, SeparatedKernel};
use crate::mra::FunctionTree;
use crate::scf::ops::{kinetic_matrix, matrix_elements, product};
use crate::scf::transform_orbitals;
use nalgebra::DMatrix;

/// Smallest admissible MP2 energy denominator.
pub const MIN_DENOMINATOR: f64 = 1e-6;

/// Quantities needed for diagonal-pair MP2 in a virtual space.
#[derive(Debug, Clone)]
pub struct Mp2Integrals {
    /// diagonal Fock elements of the correlated occupied orbitals
    pub eps_occ: Vec<f64>,
    /// virtual-virtual Fock block
    pub fock_virt: DMatrix<f64>,
    /// `pair[i][(a, b)] = ⟨ab|ii⟩`
    pub pair: Vec<DMatrix<f64>>,
}

/// Fock blocks and pair integrals from MRA orbitals; the Fock operator uses
/// all of `occ` (core included), amplitudes are built for `occ[correlated]`.
pub fn mp2_integrals(
    occ: &[FunctionTree],
    correlated: &[usize],
    virt: &[FunctionTree],
    vnuc: &FunctionTree,
    poisson: &SeparatedKernel,
) -> Result<Mp2Integrals, ActiveSpaceError> {
    let no = occ.len();
    let nv = virt.len();
    // Coulomb potential of the closed-shell density
    let mut rho = product(&occ[0], &occ[0]);
    for o in &occ[1..] {
        rho = FunctionTree::add(&rho, &product(o, o), 1.0, 1.0)?;
    }
    let vj = greenop::apply(poisson, &rho.truncated())?.scaled(2.0);
    // exchange potentials g_ja = Poisson(φ_j φ_a)
    let mut kpot: Vec<Vec<FunctionTree>> = Vec::with_capacity(no);
    for o in occ {
        let row = virt
            .iter()
            .map(|v| greenop::apply(poisson, &product(o, v)))
            .collect::<Result<Vec<_>, _>>()?;
        kpot.push(row);
    }
    let t = kinetic_matrix(virt);
    let mut fphi = Vec::with_capacity(nv);
    for (b, v) in virt.iter().enumerate() {
        let mut terms = vec![(1.0, product(vnuc, v)), (1.0, product(&vj, v))];
        for j in 0..no {
            terms.push((-1.0, product(&kpot[j][b], &occ[j])));
        }
        let refs: Vec<(f64, &FunctionTree)> = terms.iter().map(|(c, f)| (*c, f)).collect();
        fphi.push(FunctionTree::linear_combination(&refs)?.truncated());
    }
    let f = t + matrix_elements(virt, &fphi);
    let fock_virt = (&f + f.transpose()) * 0.5;

    // occupied diagonal Fock elements
    let t_occ = kinetic_matrix(occ);
    let mut eps_occ = Vec::with_capacity(correlated.len());
    let mut pair = Vec::with_capacity(correlated.len());
    for &i in correlated {
        let phi = &occ[i];
        let mut e = t_occ[(i, i)] + FunctionTree::inner(phi, &product(vnuc, phi))? + FunctionTree::inner(phi, &product(&vj, phi))?;
        for j in 0..no {
            let gij = greenop::apply(poisson, &product(phi, &occ[j]))?;
            e -= FunctionTree::inner(&product(phi, &occ[j]), &gij)?;
        }
        eps_occ.push(e);
        // ⟨ab|ii⟩ = ⟨φ_a φ_i | Poisson(φ_b φ_i)⟩
        let dens: Vec<FunctionTree> = virt.iter().map(|v| product(v, phi)).collect();
        let mut m = DMatrix::zeros(nv, nv);
        for a in 0..nv {
            for b in 0..nv {
                m[(a, b)] = FunctionTree::inner(&dens[a], &kpot[i][b])?;
            }
        }
        pair.push((&m + m.transpose()) * 0.5);
    }
    Ok(Mp2Integrals {
        eps_occ,
        fock_virt,
        pair,
    })
}

/// PNOs of one occupied orbital, expressed in the guess-virtual basis.
#[derive(Debug, Clone)]
pub struct PairPnos {
    pub occupied: usize,
    /// descending
    pub occupations: Vec<f64>,
    /// `n_virt × kept` coefficients
    pub coefficients: DMatrix<f64>,
}

#[derive(Debug, Clone)]
pub struct PnoResult {
    pub pairs: Vec<PairPnos>,
    /// merged and orthonormalized PNO coefficients (`n_virt × n_merged`)
    pub merged: DMatrix<f64>,
    pub merged_occupations: Vec<f64>,
    /// position in `pairs` of the pair each merged PNO came from
    pub parent: Vec<usize>,
    /// pair correlation energies `Σ_ab t_ab ⟨ab|ii⟩`
    pub pair_energies: Vec<f64>,
}

impl PnoResult {
    /// Merged PNOs as functions over the guess virtuals.
    pub fn orbitals(&self, virt: &[FunctionTree]) -> Result<Vec<FunctionTree>, ActiveSpaceError> {
        Ok(transform_orbitals(virt, &self.merged)?)
    }
}

/// Diagonal-pair MP2 PNOs. The guess virtuals are first rotated to
/// diagonalize their Fock block, so the result does not depend on how the
/// guess space is spanned. PNOs with occupation `≤ cutoff` are discarded;
/// `max_total` optionally keeps only the most strongly occupied ones overall.
pub fn diagonal_mp2_pnos(ints: &Mp2Integrals, cutoff: f64, max_total: Option<usize>) -> Result<PnoResult, ActiveSpaceError> {
    let nv = ints.fock_virt.nrows();
    let eig = ints.fock_virt.clone().symmetric_eigen();
    let order = crate::scf::sorted_indices(eig.eigenvalues.as_slice());
    let w = DMatrix::from_fn(nv, nv, |i, j| eig.eigenvectors[(i, order[j])]);
    let eps_v: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();

    let mut pairs = Vec::new();
    let mut pair_energies = Vec::new();
    for (p, (&ei, gi)) in ints.eps_occ.iter().zip(&ints.pair).enumerate() {
        let g = w.transpose() * gi * &w;
        let mut t = DMatrix::zeros(nv, nv);
        let mut ecorr = 0.0;
        for a in 0..nv {
            for b in 0..nv {
                let den = eps_v[a] + eps_v[b] - 2.0 * ei;
                if den.abs() < MIN_DENOMINATOR {
                    return Err(ActiveSpaceError::SmallDenominator { pair: p, value: den });
                }
                t[(a, b)] = -g[(a, b)] / den;
                ecorr += t[(a, b)] * g[(a, b)];
            }
        }
        pair_energies.push(ecorr);
        let d = &t.transpose() * &t + &t * t.transpose();
        let de = d.symmetric_eigen();
        let mut idx: Vec<usize> = (0..nv).collect();
        idx.sort_by(|&a, &b| de.eigenvalues[b].partial_cmp(&de.eigenvalues[a]).unwrap().then(a.cmp(&b)));
        let kept: Vec<usize> = idx.into_iter().filter(|&i| de.eigenvalues[i] > cutoff).collect();
        let mut c = DMatrix::from_fn(nv, kept.len(), |r, j| de.eigenvectors[(r, kept[j])]);
        for mut col in c.column_iter_mut() {
            let imax = col.iamax();
            if col[imax] < 0.0 {
                col.neg_mut();
            }
        }
        pairs.push(PairPnos {
            occupied: p,
            occupations: kept.iter().map(|&i| de.eigenvalues[i].max(0.0)).collect(),
            coefficients: &w * c,
        });
    }

    // select, then group by parent pair (occupation order within a pair)
    let mut all: Vec<(usize, usize, f64)> = pairs
        .iter()
        .enumerate()
        .flat_map(|(p, pp)| pp.occupations.iter().enumerate().map(move |(j, &o)| (p, j, o)))
        .collect();
    all.sort_by(|a, b| b.2.partial_cmp(&a.2).unwrap().then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
    if let Some(m) = max_total {
        all.truncate(m);
    }
    all.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
    let raw = DMatrix::from_fn(nv, all.len(), |r, c| pairs[all[c].0].coefficients[(r, all[c].1)]);
    let merged = if all.is_empty() {
        raw
    } else {
        let s = raw.transpose() * &raw;
        let x = crate::scf::inverse_sqrt(&s)?;
        &raw * x
    };
    Ok(PnoResult {
        pairs,
        merged,
        merged_occupations: all.iter().map(|a| a.2).collect(),
        parent: all.iter().map(|a| a.0).collect(),
        pair_energies,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(nv: usize, scale: f64) -> Mp2Integrals {
        let fock_virt = DMatrix::from_fn(nv, nv, |i, j| if i == j { 0.3 + 0.2 * i as f64 } else { 0.01 * ((i + j) as f64).sin() });
        let pair = vec![DMatrix::from_fn(nv, nv, |i, j| scale * 0.05 / (1.0 + (i + j) as f64))];
        Mp2Integrals {
            eps_occ: vec![-0.6],
            fock_virt: (&fock_virt + fock_virt.transpose()) * 0.5,
            pair,
        }
    }

    #[test]
    fn zero_interaction_gives_no_pnos() {
        let r = diagonal_mp2_pnos(&toy(4, 0.0), 1e-3, None).unwrap();
        assert!(r.merged_occupations.is_empty());
        assert_eq!(r.pair_energies, vec![0.0]);
    }

    #[test]
    fn occupations_match_direct_eigendecomposition() {
        let ints = toy(5, 1.0);
        let r = diagonal_mp2_pnos(&ints, 0.0, None).unwrap();
        // oracle: amplitudes in the semicanonical basis, D = 2 t²
        let e = ints.fock_virt.clone().symmetric_eigen();
        let w = e.eigenvectors.clone();
        let g = w.transpose() * &ints.pair[0] * &w;
        let t = DMatrix::from_fn(5, 5, |a, b| -g[(a, b)] / (e.eigenvalues[a] + e.eigenvalues[b] + 1.2));
        let d = &t * &t * 2.0;
        let trace = d.trace();
        let sum: f64 = r.pairs[0].occupations.iter().sum();
        assert!((trace - sum).abs() < 1e-10);
        let occ = &r.pairs[0].occupations;
        assert!(occ.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn rotation_of_the_guess_space_leaves_occupations_unchanged() {
        let ints = toy(4, 1.0);
        let q = DMatrix::from_fn(4, 4, |i, j| ((i * 4 + j) as f64 * 0.9).cos()).qr().q();
        let rot = Mp2Integrals {
            eps_occ: ints.eps_occ.clone(),
            fock_virt: q.transpose() * &ints.fock_virt * &q,
            pair: vec![q.transpose() * &ints.pair[0] * &q],
        };
        let a = diagonal_mp2_pnos(&ints, 0.0, None).unwrap();
        let b = diagonal_mp2_pnos(&rot, 0.0, None).unwrap();
        for (x, y) in a.pairs[0].occupations.iter().zip(&b.pairs[0].occupations) {
            assert!((x - y).abs() < 1e-8);
        }
    }

    #[test]
    fn vanishing_denominator_is_reported() {
        let mut ints = toy(3, 1.0);
        ints.eps_occ[0] = ints.fock_virt.clone().symmetric_eigen().eigenvalues.min();
        assert!(matches!(
            diagonal_mp2_pnos(&ints, 1e-3, None),
            Err(ActiveSpaceError::SmallDenominator { .. })
        ));
    }
}
