//! Orbital-level building blocks shared by the SCF and refinement solvers.

use super::ScfError;
use crate::greenop::{self, SeparatedKernel};
use crate::mra::FunctionTree;
use nalgebra::DMatrix;
use std::collections::HashMap;

/// Smallest decay constant used in the bound-state Helmholtz update.
pub const KAPPA_MIN: f64 = 0.05;

/// Pointwise product, truncated.
pub fn product(a: &FunctionTree, b: &FunctionTree) -> FunctionTree {
    FunctionTree::multiply(a, b).expect("trees share a domain").truncated()
}

/// `(∂_x f, ∂_y f, ∂_z f)`.
pub fn gradient(f: &FunctionTree) -> [FunctionTree; 3] {
    [f.derivative(0), f.derivative(1), f.derivative(2)]
}

/// `T_ij = ½ Σ_q ⟨∂_q φ_i | ∂_q φ_j⟩`.
pub fn kinetic_matrix(orbs: &[FunctionTree]) -> DMatrix<f64> {
    let grads: Vec<[FunctionTree; 3]> = orbs.iter().map(gradient).collect();
    let n = orbs.len();
    let mut t = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v: f64 = (0..3)
                .map(|q| FunctionTree::inner(&grads[i][q], &grads[j][q]).expect("same domain"))
                .sum();
            t[(i, j)] = 0.5 * v;
            t[(j, i)] = 0.5 * v;
        }
    }
    t
}

/// `M_ij = ⟨bra_i | ket_j⟩`.
pub fn matrix_elements(bra: &[FunctionTree], ket: &[FunctionTree]) -> DMatrix<f64> {
    DMatrix::from_fn(bra.len(), ket.len(), |i, j| FunctionTree::inner(&bra[i], &ket[j]).expect("same domain"))
}

/// Coulomb potentials `g_k^l = ∫ φ_k φ_l / |r − r'|` for all `k ≤ l`.
pub fn pair_potentials(
    orbs: &[FunctionTree],
    poisson: &SeparatedKernel,
) -> Result<HashMap<(usize, usize), FunctionTree>, ScfError> {
    let mut out = HashMap::new();
    for k in 0..orbs.len() {
        for l in k..orbs.len() {
            let rho = product(&orbs[k], &orbs[l]);
            out.insert((k, l), greenop::apply(poisson, &rho)?);
        }
    }
    Ok(out)
}

/// Looks up `g_k^l` in a map holding only `k ≤ l`.
pub fn pair<'a>(map: &'a HashMap<(usize, usize), FunctionTree>, k: usize, l: usize) -> &'a FunctionTree {
    &map[&(k.min(l), k.max(l))]
}

/// Kernel parameter `κ = √(max(−2ε, κ_min²))`; clamped values are reported.
pub fn bsh_kappa(energy: f64) -> (f64, bool) {
    let arg = -2.0 * energy;
    if arg >= KAPPA_MIN * KAPPA_MIN {
        (arg.sqrt(), false)
    } else {
        (KAPPA_MIN, true)
    }
}

/// `−2 G_κ ∗ rhs` with the bound-state Helmholtz kernel.
pub fn bsh_step(kappa: f64, rhs: &FunctionTree) -> Result<FunctionTree, ScfError> {
    let op = greenop::bsh_operator(kappa, rhs.half_width(), rhs.thresh())?;
    let mut out = greenop::apply(&op, rhs)?;
    out.scale(-2.0);
    Ok(out)
}

/// Normalized 3D s-Gaussian `(2α/π)^{3/4} exp(−α |r − c|²)`.
pub fn gaussian(alpha: f64, centre: [f64; 3]) -> impl Fn(&[f64]) -> f64 {
    let n = (2.0 * alpha / std::f64::consts::PI).powf(0.75);
    move |x: &[f64]| {
        let r2 = (x[0] - centre[0]).powi(2) + (x[1] - centre[1]).powi(2) + (x[2] - centre[2]).powi(2);
        n * (-alpha * r2).exp()
    }
}
