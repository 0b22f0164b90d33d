//! Natural orbitals and Lagrange multipliers.

use super::RefineError;
use crate::mra::FunctionTree;
use crate::scf::transform_orbitals;
use crate::secondq::IntegralTensors;
use crate::wfn::SpinSummedRdms;
use nalgebra::DMatrix;

/// Occupations closer than this are treated as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct NaturalOrbitalTransform {
    /// orthogonal; column `j` is natural orbital `j` in the old basis
    pub u: DMatrix<f64>,
    /// descending
    pub occupations: Vec<f64>,
}

/// Diagonalizes `D1`. Columns are ordered by descending occupation; within
/// a degenerate cluster they are rotated to best match the old basis
/// vectors, and each column's largest component is made positive.
pub fn natural_transform(d1: &DMatrix<f64>) -> NaturalOrbitalTransform {
    let n = d1.nrows();
    let sym = (d1 + d1.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap().then(a.cmp(&b)));
    let mut u = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    let occ: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (occ[start] - occ[end]).abs() < DEGENERACY_TOL {
            end += 1;
        }
        if end - start > 1 {
            align_cluster(&mut u, start, end);
        }
        start = end;
    }
    // order columns within clusters by their dominant old index
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (occ[start] - occ[end]).abs() < DEGENERACY_TOL {
            end += 1;
        }
        let mut cols: Vec<usize> = (start..end).collect();
        cols.sort_by_key(|&c| u.column(c).iamax());
        let block = DMatrix::from_fn(n, end - start, |i, j| u[(i, cols[j])]);
        for j in 0..end - start {
            u.set_column(start + j, &block.column(j));
        }
        start = end;
    }
    for mut col in u.column_iter_mut() {
        let imax = col.iamax();
        if col[imax] < 0.0 {
            col.neg_mut();
        }
    }
    NaturalOrbitalTransform { u, occupations: occ }
}

/// Rotates columns `start..end` within their span to maximize overlap with
/// the old basis vectors carrying the most weight in that span.
fn align_cluster(u: &mut DMatrix<f64>, start: usize, end: usize) {
    let n = u.nrows();
    let d = end - start;
    let v = u.columns(start, d).into_owned();
    let mut weight: Vec<(usize, f64)> = (0..n).map(|i| (i, v.row(i).norm_squared())).collect();
    weight.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    let mut rows: Vec<usize> = weight[..d].iter().map(|w| w.0).collect();
    rows.sort_unstable();
    // orthogonal Procrustes: Q maximizing tr(E_rowsᵀ V Q)
    let m = DMatrix::from_fn(d, d, |a, b| v[(rows[a], b)]);
    let svd = m.svd(true, true);
    let (uu, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
    let q = vt.transpose() * uu.transpose();
    let rotated = v * q;
    for j in 0..d {
        u.set_column(start + j, &rotated.column(j));
    }
}

/// Natural orbitals and the densities and integrals expressed in them.
pub fn to_natural_orbitals(
    orbs: &[FunctionTree],
    rdms: &SpinSummedRdms,
) -> Result<(Vec<FunctionTree>, SpinSummedRdms, NaturalOrbitalTransform), RefineError> {
    let no = natural_transform(&rdms.d1);
    let orbs = transform_orbitals(orbs, &no.u)?;
    let mut r = rdms.transform(&no.u);
    // exact diagonal up to round-off
    for i in 0..r.n {
        for j in 0..r.n {
            if i != j {
                r.d1[(i, j)] = 0.0;
            }
        }
    }
    Ok((orbs, r, no))
}

/// `ε[a, i] = Σ_l D1[i, l] h[a, l] + Σ_{qrs} D2[i, q, r, s] ⟨aq|rs⟩`; in the
/// natural-orbital basis the first term is `n_i h[a, i]`.
pub fn multipliers(t: &IntegralTensors, rdms: &SpinSummedRdms) -> Result<DMatrix<f64>, RefineError> {
    let n = t.n();
    if rdms.n != n {
        return Err(RefineError::Shape(format!("integrals over {n} orbitals, densities over {}", rdms.n)));
    }
    let n3 = n * n * n;
    let g = t.g_data();
    let mut eps = t.h() * rdms.d1.transpose();
    for a in 0..n {
        let ga = &g[a * n3..(a + 1) * n3];
        for i in 0..n {
            let di = &rdms.d2[i * n3..(i + 1) * n3];
            eps[(a, i)] += ga.iter().zip(di).map(|(x, y)| x * y).sum::<f64>();
        }
    }
    Ok(eps)
}

/// `max |ε − εᵀ|`, the stationarity diagnostic.
pub fn asymmetry(eps: &DMatrix<f64>) -> f64 {
    (eps - eps.transpose()).amax()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_closed_form() {
        let d1 = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]);
        let no = natural_transform(&d1);
        assert!((no.occupations[0] - 1.5).abs() < 1e-14);
        assert!((no.occupations[1] - 0.5).abs() < 1e-14);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((no.u[(0, 0)].abs() - s).abs() < 1e-14 && (no.u[(1, 0)].abs() - s).abs() < 1e-14);
        assert!((no.u[(0, 0)] - no.u[(1, 0)]).abs() < 1e-14);
    }

    #[test]
    fn diagonal_input_is_a_signed_permutation() {
        let d1 = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.1, 1.9, 0.4]));
        let no = natural_transform(&d1);
        assert_eq!(no.occupations, vec![1.9, 0.4, 0.1]);
        for j in 0..3 {
            let c = no.u.column(j);
            assert_eq!(c.iter().filter(|v| v.abs() == 1.0).count(), 1);
        }
    }

    #[test]
    fn degenerate_occupations_keep_the_old_basis() {
        let d1 = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 1.0, 0.5]));
        let no = natural_transform(&d1);
        assert!((&no.u - DMatrix::identity(3, 3)).amax() < 1e-12);
    }

    #[test]
    fn single_orbital_closed_shell_multiplier() {
        let mut t = IntegralTensors::zeros(1);
        t.h_mut()[(0, 0)] = -1.1;
        t.set_g(0, 0, 0, 0, 0.6);
        let r = SpinSummedRdms::closed_shell(1, 1);
        let e = multipliers(&t, &r).unwrap();
        assert!((e[(0, 0)] - (2.0 * -1.1 + 2.0 * 0.6)).abs() < 1e-15);
    }

    #[test]
    fn contraction_matches_quadruple_loop() {
        let t = IntegralTensors::random(3, 4);
        let mut r = SpinSummedRdms::closed_shell(3, 1);
        // generic (non-physical) densities exercise every index
        for (i, v) in r.d2.iter_mut().enumerate() {
            *v = ((i as f64) * 0.37).sin();
        }
        r.d1 = DMatrix::from_fn(3, 3, |i, j| ((i + 2 * j) as f64).cos());
        let e = multipliers(&t, &r).unwrap();
        for a in 0..3 {
            for i in 0..3 {
                let mut v = 0.0;
                for l in 0..3 {
                    v += r.d1[(i, l)] * t.h()[(a, l)];
                    for m in 0..3 {
                        for k in 0..3 {
                            v += r.d2(i, l, m, k) * t.g(a, l, m, k);
                        }
                    }
                }
                assert!((v - e[(a, i)]).abs() < 1e-12);
            }
        }
    }
}
