//! Central-flux multiwavelet derivative and the gradient-form kinetic energy.

use super::tensor::apply_axis;
use super::{FunctionTree, NodeKey};
use std::collections::BTreeMap;

impl FunctionTree {
    /// Leaves refined (exactly) until every leaf's same-level neighbours
    /// along the listed axes are covered by a leaf of equal or coarser level.
    fn balanced_leaves(&self, axes: &[usize]) -> BTreeMap<NodeKey, Vec<f64>> {
        let mut leaves = self.leaves.clone();
        loop {
            let interior = interior_of(&leaves);
            let mut to_split = Vec::new();
            for key in leaves.keys() {
                let needs = axes.iter().any(|&q| {
                    [-1i64, 1].iter().any(|&s| {
                        let mut delta = [0i64; 3];
                        delta[q] = s;
                        key.shifted(delta, self.dim)
                            .map(|n| interior.contains(&n))
                            .unwrap_or(false)
                    })
                });
                if needs {
                    to_split.push(*key);
                }
            }
            if to_split.is_empty() {
                return leaves;
            }
            for key in to_split {
                let s = leaves.remove(&key).expect("leaf present");
                for (c, cs) in key.children(self.dim).zip(self.split_block(&s)) {
                    leaves.insert(c, cs);
                }
            }
        }
    }

    /// Coefficients at `key` from a leaf at `key` or at one of its ancestors.
    fn coeffs_from_ancestor(&self, leaves: &BTreeMap<NodeKey, Vec<f64>>, key: &NodeKey) -> Option<Vec<f64>> {
        let mut level = key.level as i32;
        while level >= 0 {
            let anc = key.ancestor_at(level as u8);
            if let Some(s) = leaves.get(&anc) {
                let mut s = s.clone();
                for lv in (level as u8 + 1)..=key.level {
                    let step = key.ancestor_at(lv);
                    s = self.split_block(&s).swap_remove(step.child_index(self.dim));
                }
                return Some(s);
            }
            level -= 1;
        }
        None
    }

    fn derivative_on(&self, leaves: &BTreeMap<NodeKey, Vec<f64>>, axis: usize) -> FunctionTree {
        let k = self.order();
        let b = &self.basis;
        let mut out = BTreeMap::new();
        for (key, s) in leaves {
            let inv_h = 1.0 / self.box_width(key.level);
            let mut acc = apply_axis(s, k, self.dim, axis, &b.deriv_r0, k);
            for (shift, mat) in [(1i64, &b.deriv_rp), (-1i64, &b.deriv_rm)] {
                let mut delta = [0i64; 3];
                delta[axis] = shift;
                if let Some(nkey) = key.shifted(delta, self.dim) {
                    if let Some(ns) = self.coeffs_from_ancestor(leaves, &nkey) {
                        let t = apply_axis(&ns, k, self.dim, axis, mat, k);
                        acc.iter_mut().zip(&t).for_each(|(a, v)| *a += v);
                    }
                }
            }
            acc.iter_mut().for_each(|v| *v *= inv_h);
            out.insert(*key, acc);
        }
        FunctionTree::from_leaves(self.dim, self.basis.clone(), self.half_width, self.thresh, self.max_depth, out)
    }

    /// Partial derivative along `axis` (zero boundary values outside the domain).
    pub fn derivative(&self, axis: usize) -> FunctionTree {
        assert!(axis < self.dim, "axis {axis} out of range for dimension {}", self.dim);
        let leaves = self.balanced_leaves(&[axis]);
        self.derivative_on(&leaves, axis)
    }

    /// `⟨f| -½∇² |f⟩` evaluated as `½ Σ_q ‖∂_q f‖²`.
    pub fn kinetic_energy(&self) -> f64 {
        let axes: Vec<usize> = (0..self.dim).collect();
        let leaves = self.balanced_leaves(&axes);
        axes.iter()
            .map(|&q| {
                let d = self.derivative_on(&leaves, q);
                0.5 * d.norm2().powi(2)
            })
            .sum()
    }

    /// `⟨f| -½∇² |g⟩` in symmetric gradient form.
    pub fn kinetic_matrix_element(f: &FunctionTree, g: &FunctionTree) -> Result<f64, super::MraError> {
        let mut sum = 0.0;
        for q in 0..f.dim {
            let df = f.derivative(q);
            let dg = g.derivative(q);
            sum += 0.5 * FunctionTree::inner(&df, &dg)?;
        }
        Ok(sum)
    }
}

fn interior_of(leaves: &BTreeMap<NodeKey, Vec<f64>>) -> std::collections::HashSet<NodeKey> {
    let mut set = std::collections::HashSet::new();
    for key in leaves.keys() {
        let mut k = *key;
        while let Some(p) = k.parent() {
            if !set.insert(p) {
                break;
            }
            k = p;
        }
    }
    set
}

#[cfg(test)]
mod tests {
    use super::super::MraConfig;
    use super::*;

    #[test]
    fn derivative_of_sine_is_cosine() {
        let cfg = MraConfig {
            k: 8,
            thresh: 1e-8,
            half_width: std::f64::consts::PI,
            max_depth: 20,
            initial_level: 2,
        };
        let f = FunctionTree::project(|x| (-x[0] * x[0]).exp() * x[0].sin(), &cfg, 1).unwrap();
        let df = f.derivative(0);
        for &x in &[-1.3, -0.2, 0.4, 1.1] {
            let exact = (-x * x as f64).exp() * ((x as f64).cos() - 2.0 * x * (x as f64).sin());
            assert!((df.evaluate(&[x]).unwrap() - exact).abs() < 1e-5, "x = {x}");
        }
    }

    #[test]
    fn kinetic_energy_of_1d_gaussian() {
        // normalized e^{-αx²}: ⟨T⟩ = α/2
        let alpha = 1.5;
        let cfg = MraConfig {
            k: 7,
            thresh: 1e-7,
            half_width: 10.0,
            max_depth: 20,
            initial_level: 2,
        };
        let n = (2.0 * alpha / std::f64::consts::PI).powf(0.25);
        let f = FunctionTree::project(|x| n * (-alpha * x[0] * x[0]).exp(), &cfg, 1).unwrap();
        assert!((f.kinetic_energy() - alpha / 2.0).abs() < 1e-6);
        let g = f.scaled(3.0);
        assert!((g.kinetic_energy() - 9.0 * f.kinetic_energy()).abs() < 1e-10);
    }
}
