#![allow(dead_code)]

//! Closed-shell Roothaan–Hall in an even-tempered s-type Gaussian basis
//! centred on one nucleus; all integrals in closed form.

use nalgebra::{DMatrix, DVector};
use std::f64::consts::PI;

pub struct GaussianRhf {
    pub energy: f64,
    pub orbital_energy: f64,
    pub iterations: usize,
}

/// Exponents `a_i = first · ratio^i`.
pub fn even_tempered(first: f64, ratio: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| first * ratio.powi(i as i32)).collect()
}

/// RHF of an atom with nuclear charge `z` and `2 n_occ` electrons.
pub fn atom_rhf(z: f64, n_occ: usize, alphas: &[f64]) -> GaussianRhf {
    let n = alphas.len();
    // primitive normalization (2a/π)^{3/4}
    let norm: Vec<f64> = alphas.iter().map(|a| (2.0 * a / PI).powf(0.75)).collect();
    let s = DMatrix::from_fn(n, n, |i, j| {
        let p = alphas[i] + alphas[j];
        norm[i] * norm[j] * (PI / p).powf(1.5)
    });
    let h = DMatrix::from_fn(n, n, |i, j| {
        let (a, b) = (alphas[i], alphas[j]);
        let p = a + b;
        let kinetic = 3.0 * a * b / p * (PI / p).powf(1.5);
        let nuclear = -2.0 * PI * z / p;
        norm[i] * norm[j] * (kinetic + nuclear)
    });
    let eri = |i: usize, j: usize, k: usize, l: usize| {
        let p = alphas[i] + alphas[j];
        let q = alphas[k] + alphas[l];
        norm[i] * norm[j] * norm[k] * norm[l] * 2.0 * PI.powf(2.5) / (p * q * (p + q).sqrt())
    };
    let mut g = vec![0.0; n * n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    g[((i * n + j) * n + k) * n + l] = eri(i, j, k, l);
                }
            }
        }
    }
    // canonical orthogonalization X = U s^{-1/2}
    let se = s.clone().symmetric_eigen();
    let keep: Vec<usize> = (0..n).filter(|&i| se.eigenvalues[i] > 1e-10).collect();
    let x = DMatrix::from_fn(n, keep.len(), |r, c| se.eigenvectors[(r, keep[c])] / se.eigenvalues[keep[c]].sqrt());

    let mut p = DMatrix::<f64>::zeros(n, n);
    let mut energy = 0.0;
    let mut eps_occ = 0.0;
    for it in 0..500 {
        let mut f = h.clone();
        for i in 0..n {
            for j in 0..n {
                let mut v = 0.0;
                for k in 0..n {
                    for l in 0..n {
                        v += p[(k, l)] * (g[((i * n + j) * n + k) * n + l] - 0.5 * g[((i * n + k) * n + j) * n + l]);
                    }
                }
                f[(i, j)] += v;
            }
        }
        let e_new = 0.5 * p.component_mul(&(&h + &f)).sum();
        let fp = x.transpose() * &f * &x;
        let eig = fp.symmetric_eigen();
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
        let c = &x * &eig.eigenvectors;
        let mut p_new = DMatrix::zeros(n, n);
        for &o in order.iter().take(n_occ) {
            let col: DVector<f64> = c.column(o).into();
            p_new += 2.0 * &col * col.transpose();
        }
        eps_occ = eig.eigenvalues[order[n_occ - 1]];
        let dp = (&p_new - &p).amax();
        // light damping keeps diffuse bases from oscillating
        p = if it == 0 { p_new } else { 0.6 * p_new + 0.4 * &p };
        if it > 0 && (e_new - energy).abs() < 1e-12 && dp < 1e-9 {
            return GaussianRhf {
                energy: e_new,
                orbital_energy: eps_occ,
                iterations: it,
            };
        }
        energy = e_new;
    }
    GaussianRhf {
        energy,
        orbital_energy: eps_occ,
        iterations: 500,
    }
}

/// Large even-tempered basis for helium, converged well below 1e-5 hartree.
pub fn helium_reference() -> GaussianRhf {
    atom_rhf(2.0, 1, &even_tempered(0.02, 1.8, 26))
}
