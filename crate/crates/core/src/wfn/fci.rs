//! Full configuration interaction in the determinant basis.

use super::sector::{annihilate, create, SectorBasis};
use super::{QubitState, WfnError};
use crate::secondq::{spin_orbital, IntegralTensors};
use nalgebra::{DMatrix, DVector};

/// Largest qubit count accepted by the determinant solver.
pub const MAX_FCI_QUBITS: usize = 24;
/// Sector dimension up to which the Hamiltonian is diagonalized densely.
const DENSE_LIMIT: usize = 1500;

#[derive(Debug, Clone)]
pub struct FciResult {
    pub energy: f64,
    pub basis: SectorBasis,
    /// ground-state coefficients over `basis.states()`
    pub vector: DVector<f64>,
}

impl FciResult {
    pub fn state(&self) -> Result<QubitState, WfnError> {
        self.basis.to_state(&self.vector)
    }
}

/// Sparse rows of the determinant-space Hamiltonian: `H|j⟩ = Σ_i H_ij |i⟩`.
pub fn sector_hamiltonian(t: &IntegralTensors, basis: &SectorBasis) -> Vec<Vec<(usize, f64)>> {
    let n = t.n();
    let nso = 2 * n;
    let mut cols = Vec::with_capacity(basis.dim());
    for &det in basis.states() {
        let mut col: std::collections::BTreeMap<usize, f64> = std::collections::BTreeMap::new();
        let mut add = |d: u64, v: f64| {
            if let Some(i) = basis.position(d) {
                *col.entry(i).or_insert(0.0) += v;
            }
        };
        add(det, t.e_const);
        let occ: Vec<usize> = (0..nso).filter(|&q| det >> q & 1 == 1).collect();
        // one-body: h_kl a†_kσ a_lσ
        for &q in &occ {
            let (l, s) = (q / 2, q % 2);
            let (s1, d1) = annihilate(det, q).unwrap();
            for k in 0..n {
                let h = t.h()[(k, l)];
                if h == 0.0 {
                    continue;
                }
                if let Some((s2, d2)) = create(d1, spin_orbital(k, s)) {
                    add(d2, h * s1 * s2);
                }
            }
        }
        // two-body: ½⟨kl|mn⟩ a†_kσ a†_lτ a_nτ a_mσ
        for &qm in &occ {
            let (m, s) = (qm / 2, qm % 2);
            let (s1, d1) = annihilate(det, qm).unwrap();
            for &qn in &occ {
                if qn == qm {
                    continue;
                }
                let (nn, u) = (qn / 2, qn % 2);
                let (s2, d2) = annihilate(d1, qn).unwrap();
                for l in 0..n {
                    let Some((s3, d3)) = create(d2, spin_orbital(l, u)) else { continue };
                    for k in 0..n {
                        let g = t.g(k, l, m, nn);
                        if g == 0.0 {
                            continue;
                        }
                        if let Some((s4, d4)) = create(d3, spin_orbital(k, s)) {
                            add(d4, 0.5 * g * s1 * s2 * s3 * s4);
                        }
                    }
                }
            }
        }
        cols.push(col.into_iter().collect());
    }
    cols
}

/// Dense determinant-space Hamiltonian.
pub fn sector_hamiltonian_dense(t: &IntegralTensors, basis: &SectorBasis) -> DMatrix<f64> {
    let d = basis.dim();
    let mut m = DMatrix::zeros(d, d);
    for (j, col) in sector_hamiltonian(t, basis).into_iter().enumerate() {
        for (i, v) in col {
            m[(i, j)] += v;
        }
    }
    m
}

/// Lowest eigenpair in the `n_elec`, `S_z = 0` sector.
pub fn fci(t: &IntegralTensors, n_elec: usize) -> Result<FciResult, WfnError> {
    if 2 * t.n() > MAX_FCI_QUBITS {
        return Err(WfnError::TooLarge(2 * t.n()));
    }
    let basis = SectorBasis::new(t.n(), n_elec)?;
    if basis.dim() == 0 {
        return Err(WfnError::Sector("empty sector".into()));
    }
    let (energy, mut vector) = if basis.dim() <= DENSE_LIMIT {
        let h = sector_hamiltonian_dense(t, &basis);
        lowest_eigenpair(&((&h + h.transpose()) * 0.5))
    } else {
        let cols = sector_hamiltonian(t, &basis);
        davidson(&cols, 1e-10, 200)?
    };
    fix_sign(&mut vector);
    Ok(FciResult { energy, basis, vector })
}

/// Lowest eigenvalue and eigenvector; ties resolve to the lowest index.
pub fn lowest_eigenpair(h: &DMatrix<f64>) -> (f64, DVector<f64>) {
    let eig = h.clone().symmetric_eigen();
    let mut best = 0;
    for i in 1..eig.eigenvalues.len() {
        if eig.eigenvalues[i] < eig.eigenvalues[best] {
            best = i;
        }
    }
    (eig.eigenvalues[best], eig.eigenvectors.column(best).into_owned())
}

/// Largest-magnitude component positive.
pub(crate) fn fix_sign(v: &mut DVector<f64>) {
    let imax = v.iamax();
    if v[imax] < 0.0 {
        v.neg_mut();
    }
}

fn apply_sparse(cols: &[Vec<(usize, f64)>], x: &DVector<f64>) -> DVector<f64> {
    let mut y = DVector::zeros(x.len());
    for (j, col) in cols.iter().enumerate() {
        let xj = x[j];
        if xj == 0.0 {
            continue;
        }
        for &(i, v) in col {
            y[i] += v * xj;
        }
    }
    y
}

/// Davidson iteration with diagonal preconditioning for the lowest root.
fn davidson(cols: &[Vec<(usize, f64)>], tol: f64, max_iter: usize) -> Result<(f64, DVector<f64>), WfnError> {
    let d = cols.len();
    let diag: Vec<f64> = cols
        .iter()
        .enumerate()
        .map(|(j, c)| c.iter().filter(|(i, _)| *i == j).map(|(_, v)| v).sum())
        .collect();
    let start = (0..d).min_by(|&a, &b| diag[a].partial_cmp(&diag[b]).unwrap()).unwrap();
    let mut v = vec![DVector::from_fn(d, |i, _| if i == start { 1.0 } else { 0.0 })];
    let mut hv = vec![apply_sparse(cols, &v[0])];
    for _ in 0..max_iter {
        let m = v.len();
        let small = DMatrix::from_fn(m, m, |a, b| v[a].dot(&hv[b]));
        let (theta, y) = lowest_eigenpair(&((&small + small.transpose()) * 0.5));
        let mut x = DVector::zeros(d);
        let mut hx = DVector::zeros(d);
        for a in 0..m {
            x.axpy(y[a], &v[a], 1.0);
            hx.axpy(y[a], &hv[a], 1.0);
        }
        let r = &hx - &x * theta;
        if r.norm() < tol {
            return Ok((theta, x));
        }
        let mut t = DVector::from_fn(d, |i, _| {
            let den = diag[i] - theta;
            r[i] / if den.abs() < 1e-8 { 1e-8f64.copysign(den) } else { den }
        });
        for _ in 0..2 {
            for b in &v {
                let p = b.dot(&t);
                t.axpy(-p, b, 1.0);
            }
        }
        let nt = t.norm();
        if nt < 1e-14 {
            return Ok((theta, x));
        }
        t /= nt;
        hv.push(apply_sparse(cols, &t));
        v.push(t);
        if v.len() > 40 {
            // restart from the current Ritz vector
            let nx = x.norm();
            let x = x / nx;
            hv = vec![apply_sparse(cols, &x)];
            v = vec![x];
        }
    }
    Err(WfnError::NotConverged("Davidson iteration".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_orbital_closed_form() {
        let mut t = IntegralTensors::zeros(1);
        t.h_mut()[(0, 0)] = -0.9;
        t.set_g(0, 0, 0, 0, 0.6);
        t.e_const = 0.25;
        let r = fci(&t, 2).unwrap();
        assert!((r.energy - (2.0 * -0.9 + 0.6 + 0.25)).abs() < 1e-14);
    }

    #[test]
    fn davidson_matches_dense() {
        let t = IntegralTensors::random(4, 5);
        let basis = SectorBasis::new(4, 4).unwrap();
        let dense = sector_hamiltonian_dense(&t, &basis);
        let (e_dense, _) = lowest_eigenpair(&dense);
        let (e_dav, _) = davidson(&sector_hamiltonian(&t, &basis), 1e-10, 200).unwrap();
        assert!((e_dense - e_dav).abs() < 1e-9);
    }

    #[test]
    fn oversized_space_is_refused() {
        let t = IntegralTensors::zeros(13);
        assert!(matches!(fci(&t, 2), Err(WfnError::TooLarge(26))));
    }
}
