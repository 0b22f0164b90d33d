//! One- and two-electron integrals over real spatial orbitals.
//!
//! Two-electron integrals are stored in physicist order:
//! `g(k, l, m, n) = ⟨kl|mn⟩ = ∫∫ φ_k(1) φ_l(2) φ_m(1) φ_n(2) / r₁₂`,
//! so that the chemist integral `(km|ln)` is the same number.

use super::SecondqError;
use crate::greenop::{self, SeparatedKernel};
use crate::mra::FunctionTree;
use crate::scf::{self, ops::product};
use nalgebra::DMatrix;

/// Largest tolerated deviation of the orbital overlap from the identity.
pub const ORTHONORMALITY_TOL: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct IntegralTensors {
    n: usize,
    h: DMatrix<f64>,
    g: Vec<f64>,
    /// constant energy (nuclear repulsion plus any frozen-core energy)
    pub e_const: f64,
}

impl IntegralTensors {
    pub fn new(h: DMatrix<f64>, g: Vec<f64>, e_const: f64) -> Result<Self, SecondqError> {
        let n = h.nrows();
        if h.ncols() != n || g.len() != n.pow(4) {
            return Err(SecondqError::Invalid(format!(
                "shape mismatch: h is {}×{}, g has {} entries",
                h.nrows(),
                h.ncols(),
                g.len()
            )));
        }
        if h.iter().chain(&g).any(|v| !v.is_finite()) || !e_const.is_finite() {
            return Err(SecondqError::Invalid("non-finite integral".into()));
        }
        Ok(Self { n, h, g, e_const })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            h: DMatrix::zeros(n, n),
            g: vec![0.0; n.pow(4)],
            e_const: 0.0,
        }
    }

    /// Random tensors with the full real-orbital symmetry (`h` in (−1, 1),
    /// `g` in (−0.3, 0.3)); reproducible for a given seed.
    pub fn random(n: usize, seed: u64) -> IntegralTensors {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut t = IntegralTensors::zeros(n);
        for k in 0..n {
            for l in 0..=k {
                let v = rng.gen_range(-1.0..1.0);
                t.h[(k, l)] = v;
                t.h[(l, k)] = v;
            }
        }
        for k in 0..n {
            for l in 0..n {
                for m in 0..n {
                    for nn in 0..n {
                        let v = rng.gen_range(-0.3..0.3);
                        t.set_g_symmetric(k, l, m, nn, v);
                    }
                }
            }
        }
        t.e_const = rng.gen_range(-1.0..1.0);
        t
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> &DMatrix<f64> {
        &self.h
    }

    pub fn h_mut(&mut self) -> &mut DMatrix<f64> {
        &mut self.h
    }

    /// Flat `n⁴` storage, index `((k n + l) n + m) n + n'`.
    pub fn g_data(&self) -> &[f64] {
        &self.g
    }

    #[inline]
    pub fn index(&self, k: usize, l: usize, m: usize, n: usize) -> usize {
        ((k * self.n + l) * self.n + m) * self.n + n
    }

    /// `⟨kl|mn⟩`.
    #[inline]
    pub fn g(&self, k: usize, l: usize, m: usize, n: usize) -> f64 {
        self.g[self.index(k, l, m, n)]
    }

    /// Sets one entry (no symmetry propagation).
    pub fn set_g(&mut self, k: usize, l: usize, m: usize, n: usize, v: f64) {
        let i = self.index(k, l, m, n);
        self.g[i] = v;
    }

    /// Sets every member of the 8-fold real permutation orbit of `⟨kl|mn⟩`.
    pub fn set_g_symmetric(&mut self, k: usize, l: usize, m: usize, n: usize, v: f64) {
        for (a, b, c, d) in orbit(k, l, m, n) {
            self.set_g(a, b, c, d, v);
        }
    }

    /// Scales every two-electron integral.
    pub fn scale_two_body(&mut self, factor: f64) {
        self.g.iter_mut().for_each(|v| *v *= factor);
    }

    /// Averages `h` with its transpose and `g` over each permutation orbit.
    pub fn symmetrize(&mut self) {
        self.h = (&self.h + self.h.transpose()) * 0.5;
        let n = self.n;
        let mut done = vec![false; self.g.len()];
        for k in 0..n {
            for l in 0..n {
                for m in 0..n {
                    for nn in 0..n {
                        if done[self.index(k, l, m, nn)] {
                            continue;
                        }
                        let members = orbit(k, l, m, nn);
                        let mut uniq: Vec<usize> = members.iter().map(|&(a, b, c, d)| self.index(a, b, c, d)).collect();
                        uniq.sort_unstable();
                        uniq.dedup();
                        let avg = uniq.iter().map(|&i| self.g[i]).sum::<f64>() / uniq.len() as f64;
                        for i in uniq {
                            self.g[i] = avg;
                            done[i] = true;
                        }
                    }
                }
            }
        }
    }

    /// Largest deviation from the `h` transpose and 8-fold `g` symmetries.
    pub fn symmetry_error(&self) -> f64 {
        let mut err = (&self.h - self.h.transpose()).amax();
        let n = self.n;
        for k in 0..n {
            for l in 0..n {
                for m in 0..n {
                    for nn in 0..n {
                        let v = self.g(k, l, m, nn);
                        for (a, b, c, d) in orbit(k, l, m, nn) {
                            err = err.max((self.g(a, b, c, d) - v).abs());
                        }
                    }
                }
            }
        }
        err
    }

    /// `E = Σ D1_kl h_kl + ½ Σ D2_klmn ⟨kl|mn⟩ + E_const` for spin-summed
    /// densities in the layout of [`crate::wfn::SpinSummedRdms`].
    pub fn energy(&self, d1: &DMatrix<f64>, d2: &[f64]) -> f64 {
        let one: f64 = self.h.component_mul(d1).sum();
        let two: f64 = self.g.iter().zip(d2).map(|(a, b)| a * b).sum();
        one + 0.5 * two + self.e_const
    }

    /// Closed-shell determinant energy with orbitals `0..n_occ` doubly occupied.
    pub fn closed_shell_energy(&self, n_occ: usize) -> f64 {
        let mut e = self.e_const;
        for i in 0..n_occ {
            e += 2.0 * self.h[(i, i)];
            for j in 0..n_occ {
                e += 2.0 * self.g(i, j, i, j) - self.g(i, j, j, i);
            }
        }
        e
    }

    /// Integrals in the rotated basis `φ'_j = Σ_i φ_i U_ij`.
    pub fn transform(&self, u: &DMatrix<f64>) -> IntegralTensors {
        let n = self.n;
        let m = u.ncols();
        assert_eq!(u.nrows(), n);
        let h = u.transpose() * &self.h * u;
        let cur = transform4(&self.g, n, u);
        IntegralTensors {
            n: m,
            h,
            g: cur,
            e_const: self.e_const,
        }
    }

    /// Integrals restricted to the listed orbitals (in that order).
    pub fn subset(&self, idx: &[usize]) -> IntegralTensors {
        let m = idx.len();
        let h = DMatrix::from_fn(m, m, |a, b| self.h[(idx[a], idx[b])]);
        let mut out = IntegralTensors {
            n: m,
            h,
            g: vec![0.0; m.pow(4)],
            e_const: self.e_const,
        };
        for a in 0..m {
            for b in 0..m {
                for c in 0..m {
                    for d in 0..m {
                        let v = self.g(idx[a], idx[b], idx[c], idx[d]);
                        out.set_g(a, b, c, d, v);
                    }
                }
            }
        }
        out
    }
}

/// Rotates all four indices of an `n⁴` tensor: `T'_{pqrs} = Σ U_ap U_bq U_cr U_ds T_abcd`.
pub fn transform4(t: &[f64], n: usize, u: &DMatrix<f64>) -> Vec<f64> {
    let m = u.ncols();
    assert_eq!(u.nrows(), n);
    assert_eq!(t.len(), n.pow(4));
    // four quarter transformations, each contracting the leading index and
    // appending the new one last
    let mut cur = t.to_vec();
    let mut dims = [n, n, n, n];
    for _ in 0..4 {
        let rest: usize = dims[1..].iter().product();
        let mut next = vec![0.0; m * rest];
        for a in 0..dims[0] {
            for r in 0..rest {
                let v = cur[a * rest + r];
                if v == 0.0 {
                    continue;
                }
                for p in 0..m {
                    next[r * m + p] += u[(a, p)] * v;
                }
            }
        }
        cur = next;
        dims = [dims[1], dims[2], dims[3], m];
    }
    cur
}

/// The (up to) eight index tuples related by real-orbital symmetry.
pub fn orbit(k: usize, l: usize, m: usize, n: usize) -> [(usize, usize, usize, usize); 8] {
    [
        (k, l, m, n),
        (l, k, n, m),
        (m, n, k, l),
        (n, m, l, k),
        (m, l, k, n),
        (k, n, m, l),
        (l, m, n, k),
        (n, k, l, m),
    ]
}

/// Integrals over MRA orbitals: `h = T + ⟨φ|V_nuc|φ⟩` (kinetic energy in
/// gradient form) and `⟨kl|mn⟩ = ⟨φ_k φ_m | Poisson ∗ (φ_l φ_n)⟩`.
pub fn compute_integrals(
    orbs: &[FunctionTree],
    vnuc: &FunctionTree,
    poisson: &SeparatedKernel,
    e_const: f64,
) -> Result<IntegralTensors, SecondqError> {
    let err = scf::orthonormality_error(orbs)?;
    if err > ORTHONORMALITY_TOL {
        return Err(SecondqError::NotOrthonormal(err));
    }
    let n = orbs.len();
    let t = scf::ops::kinetic_matrix(orbs);
    let vphi: Vec<FunctionTree> = orbs.iter().map(|p| product(vnuc, p)).collect();
    let h = t + scf::ops::matrix_elements(orbs, &vphi);

    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a..n).map(move |b| (a, b))).collect();
    let densities: Vec<FunctionTree> = pairs.iter().map(|&(a, b)| product(&orbs[a], &orbs[b])).collect();
    let potentials: Vec<FunctionTree> = densities
        .iter()
        .map(|rho| greenop::apply(poisson, rho))
        .collect::<Result<_, _>>()?;
    let np = pairs.len();
    let mut v = DMatrix::zeros(np, np);
    for (a, rho) in densities.iter().enumerate() {
        for (b, pot) in potentials.iter().enumerate() {
            v[(a, b)] = FunctionTree::inner(rho, pot)?;
        }
    }
    let mut out = IntegralTensors {
        n,
        h,
        g: vec![0.0; n.pow(4)],
        e_const,
    };
    for (a, &(k, m)) in pairs.iter().enumerate() {
        for (b, &(l, nn)) in pairs.iter().enumerate() {
            out.set_g_symmetric(k, l, m, nn, 0.5 * (v[(a, b)] + v[(b, a)]));
        }
    }
    out.h = (&out.h + out.h.transpose()) * 0.5;
    Ok(out)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn random_tensors(n: usize, seed: u64) -> IntegralTensors {
        IntegralTensors::random(n, seed)
    }

    #[test]
    fn symmetrize_produces_exact_orbits() {
        let mut t = IntegralTensors::zeros(3);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        t.g.iter_mut().for_each(|v| *v = rng.gen_range(-1.0..1.0));
        t.symmetrize();
        assert_eq!(t.symmetry_error(), 0.0);
    }

    #[test]
    fn identity_transform_is_exact() {
        let t = random_tensors(3, 1);
        let u = DMatrix::identity(3, 3);
        let r = t.transform(&u);
        for (a, b) in t.g.iter().zip(&r.g) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn transform_matches_brute_force() {
        let t = random_tensors(3, 2);
        let u = DMatrix::from_fn(3, 3, |i, j| ((i * 3 + j) as f64 * 0.7).sin());
        let r = t.transform(&u);
        for p in 0..3 {
            for q in 0..3 {
                for s in 0..3 {
                    for w in 0..3 {
                        let mut v = 0.0;
                        for a in 0..3 {
                            for b in 0..3 {
                                for c in 0..3 {
                                    for d in 0..3 {
                                        v += u[(a, p)] * u[(b, q)] * u[(c, s)] * u[(d, w)] * t.g(a, b, c, d);
                                    }
                                }
                            }
                        }
                        assert!((v - r.g(p, q, s, w)).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn closed_shell_energy_of_one_orbital() {
        let mut t = IntegralTensors::zeros(1);
        t.h[(0, 0)] = -1.2;
        t.set_g(0, 0, 0, 0, 0.7);
        t.e_const = 0.3;
        assert!((t.closed_shell_energy(1) - (2.0 * -1.2 + 0.7 + 0.3)).abs() < 1e-15);
    }
}
