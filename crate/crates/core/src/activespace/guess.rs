use super::ActiveSpaceError;
use crate::mra::{FunctionTree, MraConfig};
use crate::scf::ops::{gaussian, product};
use crate::scf::{orthonormality_error, overlap_matrix, transform_orbitals};
use nalgebra::DMatrix;

/// Overlap eigenvalues below this mark a linearly dependent guess.
pub const GUESS_DEPENDENCE: f64 = 1e-8;
/// Exponent of the atom-centred diffuse guess functions.
pub const DIFFUSE_EXPONENT: f64 = 0.1;

/// Polynomial factors multiplying each occupied orbital, in order.
const FACTORS: [[u8; 3]; 7] = [[1, 0, 0], [0, 1, 0], [0, 0, 1], [2, 0, 0], [0, 2, 0], [0, 0, 2], [9, 9, 9]];

/// Virtual guess functions: `{x, y, z, x², y², z², r²} · φ_i` for each
/// occupied orbital (coordinates relative to the centroid of `centres`),
/// followed by one diffuse Gaussian per centre. The first `n_guess`
/// candidates are projected out of the occupied space and canonically
/// orthonormalized; dependent combinations are dropped.
pub fn guess_virtuals(
    occ: &[FunctionTree],
    n_guess: usize,
    centres: &[[f64; 3]],
) -> Result<Vec<FunctionTree>, ActiveSpaceError> {
    let first = occ.first().ok_or_else(|| ActiveSpaceError::Invalid("no occupied orbitals".into()))?;
    if orthonormality_error(occ)? > 1e-6 {
        return Err(ActiveSpaceError::Invalid("occupied orbitals are not orthonormal".into()));
    }
    let cfg = first.config();
    let centroid = if centres.is_empty() {
        [0.0; 3]
    } else {
        let n = centres.len() as f64;
        [0, 1, 2].map(|q| centres.iter().map(|c| c[q]).sum::<f64>() / n)
    };
    let mut candidates = Vec::new();
    'outer: for phi in occ {
        for f in FACTORS {
            if candidates.len() == n_guess {
                break 'outer;
            }
            let poly = polynomial(f, centroid, &cfg)?;
            candidates.push(product(&poly, phi));
        }
    }
    for c in centres {
        if candidates.len() == n_guess {
            break;
        }
        candidates.push(FunctionTree::project(gaussian(DIFFUSE_EXPONENT, *c), &cfg, 3)?);
    }
    orthogonalize(candidates, occ)
}

fn polynomial(f: [u8; 3], c: [f64; 3], cfg: &MraConfig) -> Result<FunctionTree, ActiveSpaceError> {
    let g = move |x: &[f64]| {
        let d = [x[0] - c[0], x[1] - c[1], x[2] - c[2]];
        if f == [9, 9, 9] {
            d.iter().map(|v| v * v).sum()
        } else {
            (0..3).map(|q| d[q].powi(f[q] as i32)).product()
        }
    };
    Ok(FunctionTree::project(g, cfg, 3)?)
}

/// Projects `funcs` out of `occ` (twice, for stability), normalizes, and
/// canonically orthonormalizes the remainder.
pub(crate) fn orthogonalize(funcs: Vec<FunctionTree>, occ: &[FunctionTree]) -> Result<Vec<FunctionTree>, ActiveSpaceError> {
    let mut projected = Vec::with_capacity(funcs.len());
    for mut f in funcs {
        for _ in 0..2 {
            let mut terms: Vec<(f64, &FunctionTree)> = vec![(1.0, &f)];
            let coeffs: Vec<f64> = occ.iter().map(|o| FunctionTree::inner(o, &f)).collect::<Result<_, _>>()?;
            for (c, o) in coeffs.iter().zip(occ) {
                terms.push((-c, o));
            }
            f = FunctionTree::linear_combination(&terms)?.truncated();
        }
        let n = f.norm2();
        if n > 1e-10 {
            projected.push(f.scaled(1.0 / n));
        }
    }
    if projected.is_empty() {
        return Err(ActiveSpaceError::AllDependent);
    }
    let s = overlap_matrix(&projected)?;
    let eig = s.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len())
        .filter(|&i| eig.eigenvalues[i] >= GUESS_DEPENDENCE)
        .collect();
    if order.is_empty() {
        return Err(ActiveSpaceError::AllDependent);
    }
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let n = projected.len();
    let mut x = DMatrix::from_fn(n, order.len(), |i, j| eig.eigenvectors[(i, order[j])] / eig.eigenvalues[order[j]].sqrt());
    for mut col in x.column_iter_mut() {
        let imax = col.iamax();
        if col[imax] < 0.0 {
            col.neg_mut();
        }
    }
    let out: Vec<FunctionTree> = transform_orbitals(&projected, &x)?.into_iter().map(|f| f.truncated()).collect();
    // remove truncation drift
    Ok(crate::scf::loewdin_orthonormalize(&out)?)
}
