//! Orthonormalization of orbital sets and basis rotations.

use super::ScfError;
use crate::mra::{FunctionTree, MraError};
use nalgebra::DMatrix;

/// Scheme used to restore orthonormality after an orbital update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Orthonormalization {
    /// symmetric `S^{-1/2}`
    #[default]
    Loewdin,
    /// `S = L Lᵀ`, orbitals multiplied by `L⁻ᵀ` (order dependent)
    Cholesky,
}

/// Smallest admissible overlap eigenvalue.
pub const MIN_OVERLAP_EIGENVALUE: f64 = 1e-10;

pub fn overlap_matrix(orbs: &[FunctionTree]) -> Result<DMatrix<f64>, MraError> {
    let n = orbs.len();
    let mut s = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = FunctionTree::inner(&orbs[i], &orbs[j])?;
            s[(i, j)] = v;
            s[(j, i)] = v;
        }
    }
    Ok(s)
}

/// `new_j = Σ_i orbs_i U_ij` (no truncation).
pub fn transform_orbitals(orbs: &[FunctionTree], u: &DMatrix<f64>) -> Result<Vec<FunctionTree>, MraError> {
    assert_eq!(u.nrows(), orbs.len());
    (0..u.ncols())
        .map(|j| {
            let terms: Vec<(f64, &FunctionTree)> = orbs
                .iter()
                .enumerate()
                .filter(|(i, _)| u[(*i, j)] != 0.0)
                .map(|(i, f)| (u[(i, j)], f))
                .collect();
            if terms.is_empty() {
                Ok(orbs[0].zero_like())
            } else {
                FunctionTree::linear_combination(&terms)
            }
        })
        .collect()
}

/// `S^{-1/2}` of a symmetric positive-definite overlap matrix.
pub fn inverse_sqrt(s: &DMatrix<f64>) -> Result<DMatrix<f64>, ScfError> {
    let eig = s.clone().symmetric_eigen();
    check_positive(&eig.eigenvalues, &eig.eigenvectors)?;
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
    Ok(&eig.eigenvectors * d * eig.eigenvectors.transpose())
}

fn check_positive(values: &nalgebra::DVector<f64>, vectors: &DMatrix<f64>) -> Result<(), ScfError> {
    let (imin, &lmin) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .expect("non-empty overlap");
    if !(lmin > MIN_OVERLAP_EIGENVALUE) {
        let v = vectors.column(imin);
        let subset: Vec<usize> = (0..v.len()).filter(|&i| v[i].abs() > 0.1).collect();
        return Err(ScfError::LinearDependence {
            eigenvalue: lmin,
            orbitals: subset,
        });
    }
    Ok(())
}

pub fn loewdin_orthonormalize(orbs: &[FunctionTree]) -> Result<Vec<FunctionTree>, ScfError> {
    let s = overlap_matrix(orbs)?;
    let x = inverse_sqrt(&s)?;
    Ok(transform_orbitals(orbs, &x)?)
}

pub fn cholesky_orthonormalize(orbs: &[FunctionTree]) -> Result<Vec<FunctionTree>, ScfError> {
    let s = overlap_matrix(orbs)?;
    let eig = s.clone().symmetric_eigen();
    check_positive(&eig.eigenvalues, &eig.eigenvectors)?;
    let l = s
        .cholesky()
        .ok_or_else(|| ScfError::LinearDependence {
            eigenvalue: 0.0,
            orbitals: (0..orbs.len()).collect(),
        })?
        .l();
    let linv = l
        .try_inverse()
        .expect("Cholesky factor of a positive-definite matrix is invertible");
    // new_j = Σ_i (L⁻¹)_{ji} orbs_i
    Ok(transform_orbitals(orbs, &linv.transpose())?)
}

pub fn orthonormalize(orbs: &[FunctionTree], scheme: Orthonormalization) -> Result<Vec<FunctionTree>, ScfError> {
    match scheme {
        Orthonormalization::Loewdin => loewdin_orthonormalize(orbs),
        Orthonormalization::Cholesky => cholesky_orthonormalize(orbs),
    }
}

/// `max |S − I|` of an orbital set.
pub fn orthonormality_error(orbs: &[FunctionTree]) -> Result<f64, MraError> {
    let s = overlap_matrix(orbs)?;
    let n = s.nrows();
    Ok((s - DMatrix::identity(n, n)).abs().max())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mra::MraConfig;

    fn gaussians(centres: &[f64]) -> Vec<FunctionTree> {
        let cfg = MraConfig::new(6, 1e-6, 8.0);
        centres
            .iter()
            .map(|&c| {
                let n = (2.0 / std::f64::consts::PI).powf(0.25);
                FunctionTree::project(move |x| n * (-(x[0] - c).powi(2)).exp(), &cfg, 1).unwrap()
            })
            .collect()
    }

    #[test]
    fn loewdin_yields_identity_overlap_and_is_symmetric() {
        let orbs = gaussians(&[-0.5, 0.5]);
        let out = loewdin_orthonormalize(&orbs).unwrap();
        assert!(orthonormality_error(&out).unwrap() < 1e-8);
        // mirror symmetry is preserved
        let a = out[0].evaluate(&[-0.3]).unwrap();
        let b = out[1].evaluate(&[0.3]).unwrap();
        assert!((a - b).abs() < 1e-10);
        let again = loewdin_orthonormalize(&out).unwrap();
        for (x, y) in again.iter().zip(&out) {
            let d = FunctionTree::add(x, y, 1.0, -1.0).unwrap();
            assert!(d.norm2() < 1e-8);
        }
    }

    #[test]
    fn cholesky_keeps_first_direction() {
        let orbs = gaussians(&[-0.5, 0.5]);
        let out = cholesky_orthonormalize(&orbs).unwrap();
        assert!(orthonormality_error(&out).unwrap() < 1e-8);
        let d = FunctionTree::add(&out[0], &orbs[0], 1.0, -1.0 / orbs[0].norm2()).unwrap();
        assert!(d.norm2() < 1e-12);
    }

    #[test]
    fn dependent_sets_are_rejected() {
        let mut orbs = gaussians(&[0.0, 1.0]);
        orbs.push(orbs[0].clone());
        match loewdin_orthonormalize(&orbs) {
            Err(ScfError::LinearDependence { orbitals, .. }) => {
                assert!(orbitals.contains(&0) && orbitals.contains(&2));
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
