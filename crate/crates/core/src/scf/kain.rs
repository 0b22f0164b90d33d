//! Krylov-accelerated inexact Newton (KAIN) subspace acceleration of a
//! fixed-point iteration `x ← x + f(x)`.

use crate::mra::FunctionTree;
use nalgebra::{DMatrix, DVector};
use std::collections::VecDeque;

/// Vector space operations KAIN needs.
pub trait KainVector: Clone {
    fn dot(&self, other: &Self) -> f64;
    fn combine(terms: &[(f64, &Self)]) -> Self;
}

impl KainVector for DVector<f64> {
    fn dot(&self, other: &Self) -> f64 {
        self.dot(other)
    }

    fn combine(terms: &[(f64, &Self)]) -> Self {
        let mut out = DVector::zeros(terms[0].1.len());
        for (c, v) in terms {
            out.axpy(*c, v, 1.0);
        }
        out
    }
}

/// A set of orbitals treated as one vector (`⟨x, y⟩ = Σ_i ⟨x_i, y_i⟩`).
#[derive(Debug, Clone)]
pub struct OrbitalSet(pub Vec<FunctionTree>);

impl KainVector for OrbitalSet {
    fn dot(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| FunctionTree::inner(a, b).expect("orbitals share a domain"))
            .sum()
    }

    fn combine(terms: &[(f64, &Self)]) -> Self {
        let n = terms[0].1 .0.len();
        OrbitalSet(
            (0..n)
                .map(|i| {
                    let parts: Vec<(f64, &FunctionTree)> =
                        terms.iter().filter(|(c, _)| *c != 0.0).map(|(c, v)| (*c, &v.0[i])).collect();
                    if parts.is_empty() {
                        return terms[0].1 .0[i].zero_like();
                    }
                    FunctionTree::linear_combination(&parts)
                        .expect("orbitals share a domain")
                        .truncated()
                })
                .collect(),
        )
    }
}

/// Reciprocal condition number below which the subspace is abandoned.
const MIN_RCOND: f64 = 1e-12;

/// Ring buffer of `(x, f)` pairs, most recent last.
#[derive(Debug, Clone)]
pub struct KainHistory<V: KainVector> {
    capacity: usize,
    entries: VecDeque<(V, V)>,
    coefficients: Vec<f64>,
    solve_residual: f64,
    fallbacks: usize,
    /// optional bound on `‖x_new − x‖`
    pub max_step: Option<f64>,
}

impl<V: KainVector> KainHistory<V> {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity >= 1, "KAIN needs room for at least one entry");
        Self {
            capacity,
            entries: VecDeque::with_capacity(capacity),
            coefficients: Vec::new(),
            solve_residual: 0.0,
            fallbacks: 0,
            max_step: None,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn clear(&mut self) {
        self.entries.clear();
    }

    /// Subspace coefficients of the last update.
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// `‖A c − b‖` of the last subspace solve.
    pub fn solve_residual(&self) -> f64 {
        self.solve_residual
    }

    /// Number of updates that fell back to a plain step.
    pub fn fallbacks(&self) -> usize {
        self.fallbacks
    }

    /// Records `(x, f)` with `f` the fixed-point residual step at `x` and
    /// returns the accelerated next iterate.
    pub fn update(&mut self, x: V, f: V) -> V {
        if self.entries.len() == self.capacity {
            self.entries.pop_front();
        }
        self.entries.push_back((x, f));
        let m = self.entries.len();
        let (xm, fm) = &self.entries[m - 1];
        self.coefficients.clear();
        self.solve_residual = 0.0;
        let plain = V::combine(&[(1.0, xm), (1.0, fm)]);
        if m == 1 {
            return plain;
        }
        let n = m - 1;
        let dx: Vec<V> = (0..n).map(|i| V::combine(&[(1.0, &self.entries[i].0), (-1.0, xm)])).collect();
        let df: Vec<V> = (0..n).map(|i| V::combine(&[(1.0, &self.entries[i].1), (-1.0, fm)])).collect();
        let mut a = DMatrix::zeros(n, n);
        let mut b = DVector::zeros(n);
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] = dx[i].dot(&df[j]);
            }
            b[i] = -dx[i].dot(fm);
        }
        let svd = a.clone().svd(true, true);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        if !(smax > 0.0) || !(smin / smax > MIN_RCOND) || !smin.is_finite() {
            log::warn!("KAIN subspace ill-conditioned (rcond {:.1e}); taking a plain step", smin / smax);
            self.fallbacks += 1;
            let last = self.entries.pop_back().expect("just pushed");
            self.entries.clear();
            self.entries.push_back(last);
            return plain;
        }
        let c = match svd.solve(&b, 0.0) {
            Ok(c) => c,
            Err(_) => {
                self.fallbacks += 1;
                return plain;
            }
        };
        self.solve_residual = (&a * &c - &b).norm();
        self.coefficients = c.iter().copied().collect();
        // x_new = x_m + f_m + Σ c_j (dx_j + df_j)
        let mut terms: Vec<(f64, &V)> = vec![(1.0, xm), (1.0, fm)];
        for j in 0..n {
            terms.push((c[j], &dx[j]));
            terms.push((c[j], &df[j]));
        }
        let mut next = V::combine(&terms);
        if let Some(limit) = self.max_step {
            let step = V::combine(&[(1.0, &next), (-1.0, xm)]);
            let norm = step.dot(&step).sqrt();
            if norm > limit {
                next = V::combine(&[(1.0, xm), (limit / norm, &step)]);
            }
        }
        next
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear_problem() -> (DMatrix<f64>, DVector<f64>) {
        // spectral radius 0.9
        let a = DMatrix::from_row_slice(2, 2, &[0.9, 0.0, 0.3, -0.5]);
        let b = DVector::from_vec(vec![1.0, -2.0]);
        (a, b)
    }

    fn iterate(m: usize) -> (DVector<f64>, usize) {
        let (a, b) = linear_problem();
        let mut kain = KainHistory::new(m);
        let mut x = DVector::zeros(2);
        for it in 0..2000 {
            let f = &a * &x + &b - &x;
            if f.norm() <= 1e-10 {
                return (x, it);
            }
            x = kain.update(x, f);
        }
        panic!("no convergence with m = {m}");
    }

    #[test]
    fn kain_beats_plain_iteration() {
        let (a, b) = linear_problem();
        let exact = (DMatrix::identity(2, 2) - a).lu().solve(&b).unwrap();
        let (xp, itp) = iterate(1);
        let (xk, itk) = iterate(3);
        assert!(itk < itp, "{itk} vs {itp}");
        assert!((xp - &exact).norm() < 1e-9);
        assert!((xk - &exact).norm() < 1e-9);
    }

    #[test]
    fn single_entry_is_plain_step() {
        let mut kain = KainHistory::new(1);
        let x = DVector::from_vec(vec![1.0, 2.0]);
        let f = DVector::from_vec(vec![0.5, -1.0]);
        for _ in 0..3 {
            let next = kain.update(x.clone(), f.clone());
            assert_eq!(next, &x + &f);
        }
    }

    #[test]
    fn duplicate_history_falls_back() {
        let mut kain = KainHistory::new(3);
        let x = DVector::from_vec(vec![1.0, 2.0]);
        let f = DVector::from_vec(vec![0.5, -1.0]);
        kain.update(x.clone(), f.clone());
        let next = kain.update(x.clone(), f.clone());
        assert_eq!(next, &x + &f);
        assert_eq!(kain.fallbacks(), 1);
    }
}
