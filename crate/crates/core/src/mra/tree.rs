use super::tensor::{self, assemble_children, extract_child, transform};
use super::{basis_for, scaling_values, MraConfig, MraError, MultiwaveletBasis, NodeKey};
use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::{Arc, OnceLock};

/// Adaptive multiwavelet representation of a real function on `[-L, L]^d`.
#[derive(Debug, Clone)]
pub struct FunctionTree {
    pub(crate) dim: usize,
    pub(crate) basis: Arc<MultiwaveletBasis>,
    pub(crate) half_width: f64,
    pub(crate) thresh: f64,
    pub(crate) max_depth: u8,
    pub(crate) leaves: BTreeMap<NodeKey, Vec<f64>>,
    /// boxes where refinement stopped at `max_depth` with the criterion unmet
    pub(crate) capped: Vec<NodeKey>,
    compressed: OnceLock<Arc<HashMap<NodeKey, Vec<f64>>>>,
}

impl FunctionTree {
    pub(crate) fn from_leaves(
        dim: usize,
        basis: Arc<MultiwaveletBasis>,
        half_width: f64,
        thresh: f64,
        max_depth: u8,
        leaves: BTreeMap<NodeKey, Vec<f64>>,
    ) -> Self {
        Self {
            dim,
            basis,
            half_width,
            thresh,
            max_depth,
            leaves,
            capped: Vec::new(),
            compressed: OnceLock::new(),
        }
    }

    /// The zero function (a single root box with vanishing coefficients).
    pub fn zero(cfg: &MraConfig, dim: usize) -> Self {
        let basis = basis_for(cfg.k);
        let kd = cfg.k.pow(dim as u32);
        let mut leaves = BTreeMap::new();
        leaves.insert(NodeKey::ROOT, vec![0.0; kd]);
        Self::from_leaves(dim, basis, cfg.half_width, cfg.thresh, cfg.max_depth, leaves)
    }

    /// Zero function with the same domain, basis, and threshold as `self`.
    pub fn zero_like(&self) -> Self {
        let mut leaves = BTreeMap::new();
        leaves.insert(NodeKey::ROOT, vec![0.0; self.block_len()]);
        Self::from_leaves(self.dim, self.basis.clone(), self.half_width, self.thresh, self.max_depth, leaves)
    }

    /// Adaptively projects `f` onto the multiwavelet basis.
    pub fn project<F>(f: F, cfg: &MraConfig, dim: usize) -> Result<Self, MraError>
    where
        F: Fn(&[f64]) -> f64,
    {
        Self::project_refined(f, cfg, dim, &[], 0.0)
    }

    /// Like [`project`](Self::project), but boxes containing any of
    /// `special_points` are refined until their width drops below
    /// `special_width`, whatever the wavelet norm says.
    pub fn project_refined<F>(
        f: F,
        cfg: &MraConfig,
        dim: usize,
        special_points: &[[f64; 3]],
        special_width: f64,
    ) -> Result<Self, MraError>
    where
        F: Fn(&[f64]) -> f64,
    {
        cfg.validate()?;
        if dim != 1 && dim != 3 {
            return Err(MraError::InvalidConfig(format!("dimension must be 1 or 3, got {dim}")));
        }
        let mut tree = Self::zero(cfg, dim);
        tree.leaves.clear();
        let mut stack = uniform_keys(cfg.initial_level, dim);
        stack.reverse();
        while let Some(key) = stack.pop() {
            let children: Vec<Vec<f64>> = key
                .children(dim)
                .map(|c| tree.project_box(&f, &c))
                .collect::<Result<_, _>>()?;
            let refs: Vec<&[f64]> = children.iter().map(|c| c.as_slice()).collect();
            let big = assemble_children(&refs, tree.order(), dim);
            let (s, dnorm) = tree.split_norm(&big);
            let forced = tree.box_width(key.level) > special_width
                && special_points.iter().any(|p| tree.box_contains(&key, p));
            let accept = !forced && dnorm <= tree.truncate_tol(key.level);
            if accept || key.level >= cfg.max_depth {
                if !accept {
                    tree.capped.push(key);
                }
                tree.leaves.insert(key, s);
            } else {
                let kids: Vec<NodeKey> = key.children(dim).collect();
                for c in kids.into_iter().rev() {
                    stack.push(c);
                }
            }
        }
        if !tree.capped.is_empty() {
            log::warn!("projection hit max depth {} in {} boxes", cfg.max_depth, tree.capped.len());
        }
        Ok(tree)
    }

    /// Boxes where refinement was stopped by the depth limit.
    pub fn capped_boxes(&self) -> &[NodeKey] {
        &self.capped
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.basis.order()
    }

    pub fn basis(&self) -> &MultiwaveletBasis {
        &self.basis
    }

    pub(crate) fn basis_arc(&self) -> Arc<MultiwaveletBasis> {
        self.basis.clone()
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn thresh(&self) -> f64 {
        self.thresh
    }

    pub fn max_depth(&self) -> u8 {
        self.max_depth
    }

    pub fn config(&self) -> MraConfig {
        MraConfig {
            k: self.order(),
            thresh: self.thresh,
            half_width: self.half_width,
            max_depth: self.max_depth,
            initial_level: 0,
        }
    }

    pub fn leaves(&self) -> &BTreeMap<NodeKey, Vec<f64>> {
        &self.leaves
    }

    pub fn num_leaves(&self) -> usize {
        self.leaves.len()
    }

    pub fn depth(&self) -> u8 {
        self.leaves.keys().map(|k| k.level).max().unwrap_or(0)
    }

    pub(crate) fn block_len(&self) -> usize {
        self.order().pow(self.dim as u32)
    }

    pub(crate) fn invalidate(&mut self) {
        self.compressed = OnceLock::new();
    }

    pub fn box_width(&self, level: u8) -> f64 {
        2.0 * self.half_width / (1u64 << level) as f64
    }

    pub(crate) fn box_corner(&self, key: &NodeKey) -> [f64; 3] {
        let h = self.box_width(key.level);
        let mut c = [0.0; 3];
        for q in 0..self.dim {
            c[q] = -self.half_width + key.l[q] as f64 * h;
        }
        c
    }

    fn box_contains(&self, key: &NodeKey, p: &[f64; 3]) -> bool {
        let h = self.box_width(key.level);
        let c = self.box_corner(key);
        (0..self.dim).all(|q| p[q] >= c[q] && p[q] <= c[q] + h)
    }

    pub(crate) fn truncate_tol(&self, level: u8) -> f64 {
        self.thresh * 0.5f64.powf(level as f64 / 2.0)
    }

    /// Scaling coefficients of `f` on one box by tensor Gauss–Legendre quadrature.
    fn project_box<F: Fn(&[f64]) -> f64>(&self, f: &F, key: &NodeKey) -> Result<Vec<f64>, MraError> {
        let vals = self.sample_box(f, key)?;
        Ok(self.values_to_coeffs(&vals, key.level))
    }

    fn sample_box<F: Fn(&[f64]) -> f64>(&self, f: &F, key: &NodeKey) -> Result<Vec<f64>, MraError> {
        let d = self.dim;
        let (qx, _) = self.basis.quadrature();
        let q = qx.len();
        let h = self.box_width(key.level);
        let corner = self.box_corner(key);
        let n = q.pow(d as u32);
        let mut vals = Vec::with_capacity(n);
        let mut pt = [0.0; 3];
        for idx in 0..n {
            let mut rem = idx;
            for axis in (0..d).rev() {
                pt[axis] = corner[axis] + h * qx[rem % q];
                rem /= q;
            }
            let v = f(&pt[..d]);
            if !v.is_finite() {
                return Err(MraError::NonFinite {
                    point: pt[..d].to_vec(),
                    value: v,
                });
            }
            vals.push(v);
        }
        Ok(vals)
    }

    pub(crate) fn values_to_coeffs(&self, vals: &[f64], level: u8) -> Vec<f64> {
        let k = self.order();
        let q = self.basis.quad_x.len();
        let mats: Vec<&[f64]> = vec![&self.basis.proj_quad; self.dim];
        let mut s = transform(vals, q, k, &mats);
        let scale = self.box_width(level).powf(self.dim as f64 / 2.0);
        s.iter_mut().for_each(|v| *v *= scale);
        s
    }

    pub(crate) fn coeffs_to_values(&self, s: &[f64], level: u8) -> Vec<f64> {
        let k = self.order();
        let q = self.basis.quad_x.len();
        let mats: Vec<&[f64]> = vec![&self.basis.phi_quad; self.dim];
        let mut v = transform(s, k, q, &mats);
        let scale = self.box_width(level).powf(-(self.dim as f64) / 2.0);
        v.iter_mut().for_each(|x| *x *= scale);
        v
    }

    /// Parent scaling block of a `(2k)^d` children block.
    pub(crate) fn filter(&self, big: &[f64]) -> Vec<f64> {
        let k = self.order();
        let mats: Vec<&[f64]> = vec![&self.basis.filter; self.dim];
        transform(big, 2 * k, k, &mats)
    }

    /// Children `(2k)^d` block of a parent scaling block.
    pub(crate) fn unfilter(&self, s: &[f64]) -> Vec<f64> {
        let k = self.order();
        let mats: Vec<&[f64]> = vec![&self.basis.unfilter; self.dim];
        transform(s, k, 2 * k, &mats)
    }

    /// Parent coefficients and wavelet norm of a children block.
    pub(crate) fn split_norm(&self, big: &[f64]) -> (Vec<f64>, f64) {
        let s = self.filter(big);
        let back = self.unfilter(&s);
        let dn = big
            .iter()
            .zip(&back)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        (s, dn)
    }

    /// Splits a leaf block into its `2^d` children blocks (exact).
    pub(crate) fn split_block(&self, s: &[f64]) -> Vec<Vec<f64>> {
        let big = self.unfilter(s);
        (0..1usize << self.dim)
            .map(|c| extract_child(&big, c, self.order(), self.dim))
            .collect()
    }

    pub(crate) fn check_compatible(&self, other: &FunctionTree) -> Result<(), MraError> {
        if self.dim != other.dim {
            return Err(MraError::Mismatch(format!("dimension {} vs {}", self.dim, other.dim)));
        }
        if self.order() != other.order() {
            return Err(MraError::Mismatch(format!("order {} vs {}", self.order(), other.order())));
        }
        if (self.half_width - other.half_width).abs() > 1e-12 * self.half_width {
            return Err(MraError::Mismatch(format!(
                "half-width {} vs {}",
                self.half_width, other.half_width
            )));
        }
        Ok(())
    }

    /// All strict ancestors of leaves.
    pub(crate) fn interior_keys(&self) -> HashSet<NodeKey> {
        let mut set = HashSet::new();
        for key in self.leaves.keys() {
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

    /// Scaling coefficients at every node, interior ones by filtering.
    pub fn compressed(&self) -> Arc<HashMap<NodeKey, Vec<f64>>> {
        self.compressed
            .get_or_init(|| {
                let mut map: HashMap<NodeKey, Vec<f64>> =
                    self.leaves.iter().map(|(k, v)| (*k, v.clone())).collect();
                let depth = self.depth();
                for level in (1..=depth).rev() {
                    let parents: BTreeMap<NodeKey, ()> = map
                        .keys()
                        .filter(|k| k.level == level)
                        .filter_map(|k| k.parent())
                        .map(|p| (p, ()))
                        .collect();
                    for parent in parents.keys() {
                        if map.contains_key(parent) {
                            continue;
                        }
                        let kids: Vec<&[f64]> =
                            parent.children(self.dim).map(|c| map[&c].as_slice()).collect();
                        let big = assemble_children(&kids, self.order(), self.dim);
                        let s = self.filter(&big);
                        map.insert(*parent, s);
                    }
                }
                Arc::new(map)
            })
            .clone()
    }

    /// Leaves refined (exactly) so that no leaf is an interior box of `other`.
    pub(crate) fn refined_against(&self, other_interior: &HashSet<NodeKey>) -> BTreeMap<NodeKey, Vec<f64>> {
        let mut out = BTreeMap::new();
        let mut stack: Vec<(NodeKey, Vec<f64>)> = Vec::new();
        for (key, s) in &self.leaves {
            if other_interior.contains(key) {
                stack.push((*key, s.clone()));
                while let Some((k, s)) = stack.pop() {
                    for (c, cs) in k.children(self.dim).zip(self.split_block(&s)) {
                        if other_interior.contains(&c) {
                            stack.push((c, cs));
                        } else {
                            out.insert(c, cs);
                        }
                    }
                }
            } else {
                out.insert(*key, s.clone());
            }
        }
        out
    }

    /// Leaf maps of `a` and `b` refined to a common partition.
    pub(crate) fn co_refine(
        a: &FunctionTree,
        b: &FunctionTree,
    ) -> (BTreeMap<NodeKey, Vec<f64>>, BTreeMap<NodeKey, Vec<f64>>) {
        let ia = a.interior_keys();
        let ib = b.interior_keys();
        (a.refined_against(&ib), b.refined_against(&ia))
    }

    /// Removes wavelet detail below the level-scaled threshold `tol`.
    pub fn truncate_with(&mut self, tol: f64) {
        let d = self.dim;
        loop {
            let mut merged = 0;
            let depth = self.depth();
            for level in (1..=depth).rev() {
                let parents: BTreeMap<NodeKey, ()> = self
                    .leaves
                    .keys()
                    .filter(|k| k.level == level)
                    .filter_map(|k| k.parent())
                    .map(|p| (p, ()))
                    .collect();
                for parent in parents.keys() {
                    let kids: Vec<NodeKey> = parent.children(d).collect();
                    if !kids.iter().all(|c| self.leaves.contains_key(c)) {
                        continue;
                    }
                    let refs: Vec<&[f64]> = kids.iter().map(|c| self.leaves[c].as_slice()).collect();
                    let big = assemble_children(&refs, self.order(), d);
                    let (s, dn) = self.split_norm(&big);
                    if dn <= tol * 0.5f64.powf(parent.level as f64 / 2.0) {
                        for c in &kids {
                            self.leaves.remove(c);
                        }
                        self.leaves.insert(*parent, s);
                        merged += 1;
                    }
                }
            }
            if merged == 0 {
                break;
            }
        }
        self.invalidate();
    }

    pub fn truncate(&mut self) {
        let t = self.thresh;
        self.truncate_with(t);
    }

    pub fn truncated(mut self) -> Self {
        self.truncate();
        self
    }

    pub fn scale(&mut self, alpha: f64) {
        for v in self.leaves.values_mut() {
            v.iter_mut().for_each(|x| *x *= alpha);
        }
        self.invalidate();
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        let mut t = self.clone();
        t.scale(alpha);
        t
    }

    /// `alpha * a + beta * b` on the union refinement, not truncated.
    pub fn add(a: &FunctionTree, b: &FunctionTree, alpha: f64, beta: f64) -> Result<FunctionTree, MraError> {
        a.check_compatible(b)?;
        let (la, lb) = Self::co_refine(a, b);
        let leaves = la
            .into_iter()
            .map(|(k, va)| {
                let vb = &lb[&k];
                let v: Vec<f64> = va.iter().zip(vb).map(|(x, y)| alpha * x + beta * y).collect();
                (k, v)
            })
            .collect();
        Ok(Self::from_leaves(
            a.dim,
            a.basis.clone(),
            a.half_width,
            a.thresh.min(b.thresh),
            a.max_depth.max(b.max_depth),
            leaves,
        ))
    }

    /// `Σ c_i f_i` over a list of trees, not truncated.
    pub fn linear_combination(terms: &[(f64, &FunctionTree)]) -> Result<FunctionTree, MraError> {
        let mut iter = terms.iter();
        let Some((c0, f0)) = iter.next() else {
            return Err(MraError::Mismatch("empty linear combination".into()));
        };
        let mut acc = f0.scaled(*c0);
        for (c, f) in iter {
            acc = Self::add(&acc, f, 1.0, *c)?;
        }
        Ok(acc)
    }

    /// Pointwise product: co-refinement, then products at the children's
    /// quadrature points with one level of automatic refinement.
    pub fn multiply(a: &FunctionTree, b: &FunctionTree) -> Result<FunctionTree, MraError> {
        a.check_compatible(b)?;
        let (la, lb) = Self::co_refine(a, b);
        let mut out = a.zero_like();
        out.thresh = a.thresh.min(b.thresh);
        out.leaves.clear();
        let nchild = 1usize << a.dim;
        for (key, sa) in &la {
            let sb = &lb[key];
            let ca = a.split_block(sa);
            let cb = a.split_block(sb);
            let mut kids = Vec::with_capacity(nchild);
            for c in 0..nchild {
                let va = out.coeffs_to_values(&ca[c], key.level + 1);
                let vb = out.coeffs_to_values(&cb[c], key.level + 1);
                let prod: Vec<f64> = va.iter().zip(&vb).map(|(x, y)| x * y).collect();
                kids.push(out.values_to_coeffs(&prod, key.level + 1));
            }
            let refs: Vec<&[f64]> = kids.iter().map(|c| c.as_slice()).collect();
            let big = assemble_children(&refs, out.order(), out.dim);
            let (s, dn) = out.split_norm(&big);
            if dn <= out.truncate_tol(key.level) || key.level >= out.max_depth {
                out.leaves.insert(*key, s);
            } else {
                for (c, block) in key.children(out.dim).zip(kids) {
                    out.leaves.insert(c, block);
                }
            }
        }
        Ok(out)
    }

    /// L² inner product.
    pub fn inner(a: &FunctionTree, b: &FunctionTree) -> Result<f64, MraError> {
        a.check_compatible(b)?;
        let ca = a.compressed();
        let cb = b.compressed();
        let mut sum = 0.0;
        for (key, sa) in &a.leaves {
            if let Some(sb) = cb.get(key) {
                sum += tensor::dot(sa, sb);
            }
        }
        for (key, sb) in &b.leaves {
            if a.leaves.contains_key(key) {
                continue;
            }
            if let Some(sa) = ca.get(key) {
                sum += tensor::dot(sa, sb);
            }
        }
        Ok(sum)
    }

    pub fn norm2(&self) -> f64 {
        self.leaves
            .values()
            .map(|v| v.iter().map(|x| x * x).sum::<f64>())
            .sum::<f64>()
            .sqrt()
    }

    /// `∫ f` over the domain.
    pub fn integral(&self) -> f64 {
        self.leaves
            .iter()
            .map(|(k, v)| v[0] * self.box_width(k.level).powf(self.dim as f64 / 2.0))
            .sum()
    }

    /// Value of the local polynomial on the leaf containing `point`.
    pub fn evaluate(&self, point: &[f64]) -> Result<f64, MraError> {
        let d = self.dim;
        if point.len() != d || point.iter().any(|x| !(x.abs() <= self.half_width)) {
            return Err(MraError::OutsideDomain(point.to_vec()));
        }
        let k = self.order();
        for level in 0..=self.depth() {
            let h = self.box_width(level);
            let extent = 1u64 << level;
            let mut l = [0u32; 3];
            let mut local = [0.0; 3];
            for q in 0..d {
                let t = (point[q] + self.half_width) / h;
                let idx = (t.floor() as u64).min(extent - 1);
                l[q] = idx as u32;
                local[q] = t - idx as f64;
            }
            let key = NodeKey::new(level, l);
            if let Some(s) = self.leaves.get(&key) {
                let phis: Vec<Vec<f64>> = (0..d).map(|q| scaling_values(k, local[q])).collect();
                let mut val = 0.0;
                for (idx, c) in s.iter().enumerate() {
                    let mut rem = idx;
                    let mut prod = *c;
                    for q in (0..d).rev() {
                        prod *= phis[q][rem % k];
                        rem /= k;
                    }
                    val += prod;
                }
                return Ok(val * h.powf(-(d as f64) / 2.0));
            }
        }
        Err(MraError::OutsideDomain(point.to_vec()))
    }

    /// Pointwise map of the function values (quadrature-level), used for
    /// potentials built from other trees; detail is re-checked one level down.
    pub fn map_values<F: Fn(f64) -> f64>(&self, f: F) -> FunctionTree {
        let mut out = self.zero_like();
        out.leaves.clear();
        for (key, s) in &self.leaves {
            let kids: Vec<Vec<f64>> = self
                .split_block(s)
                .iter()
                .map(|c| {
                    let v: Vec<f64> = self.coeffs_to_values(c, key.level + 1).into_iter().map(&f).collect();
                    self.values_to_coeffs(&v, key.level + 1)
                })
                .collect();
            let refs: Vec<&[f64]> = kids.iter().map(|c| c.as_slice()).collect();
            let big = assemble_children(&refs, self.order(), self.dim);
            let (p, dn) = self.split_norm(&big);
            if dn <= self.truncate_tol(key.level) || key.level >= self.max_depth {
                out.leaves.insert(*key, p);
            } else {
                for (c, block) in key.children(self.dim).zip(kids) {
                    out.leaves.insert(c, block);
                }
            }
        }
        out
    }

    /// Replaces the truncation threshold used by later operations.
    pub fn set_thresh(&mut self, thresh: f64) {
        self.thresh = thresh;
    }
}

fn uniform_keys(level: u8, dim: usize) -> Vec<NodeKey> {
    let n = 1u32 << level;
    let mut keys = Vec::new();
    match dim {
        1 => {
            for i in 0..n {
                keys.push(NodeKey::new(level, [i, 0, 0]));
            }
        }
        _ => {
            for i in 0..n {
                for j in 0..n {
                    for l in 0..n {
                        keys.push(NodeKey::new(level, [i, j, l]));
                    }
                }
            }
        }
    }
    keys
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg1(k: usize, thresh: f64, l: f64, n0: u8) -> MraConfig {
        MraConfig {
            k,
            thresh,
            half_width: l,
            max_depth: 24,
            initial_level: n0,
        }
    }

    #[test]
    fn constant_is_a_single_root_box() {
        let c = 1.7;
        let t = FunctionTree::project(|_| c, &cfg1(5, 1e-8, 3.0, 0), 1).unwrap();
        assert_eq!(t.num_leaves(), 1);
        assert!(t.leaves().contains_key(&NodeKey::ROOT));
        assert!((t.integral() - c * 6.0).abs() < 1e-12);
        assert!((t.evaluate(&[0.3]).unwrap() - c).abs() < 1e-12);
    }

    #[test]
    fn linear_function_stops_at_initial_level() {
        let t = FunctionTree::project(|x| x[0], &cfg1(4, 1e-10, 2.0, 2), 1).unwrap();
        assert!(t.leaves().keys().all(|k| k.level == 2));
        assert_eq!(t.num_leaves(), 4);
        assert!((t.evaluate(&[0.25]).unwrap() - 0.25).abs() < 1e-10);
    }

    #[test]
    fn gaussian_integral_and_value() {
        let cfg = cfg1(7, 1e-6, 8.0, 2);
        let t = FunctionTree::project(|x| (-x[0] * x[0]).exp(), &cfg, 1).unwrap();
        assert!((t.integral() - std::f64::consts::PI.sqrt()).abs() <= 1e-6);
        assert!((t.evaluate(&[0.3]).unwrap() - (-0.09f64).exp()).abs() <= 1e-5);
    }

    #[test]
    fn non_finite_values_are_rejected() {
        let err = FunctionTree::project(|x| x[0].sqrt(), &cfg1(4, 1e-4, 1.0, 0), 1).unwrap_err();
        assert!(matches!(err, MraError::NonFinite { .. }));
    }

    #[test]
    fn leaves_partition_the_domain() {
        let cfg = cfg1(5, 1e-5, 10.0, 1);
        let t = FunctionTree::project(|x| (-4.0 * (x[0] - 1.0).powi(2)).exp(), &cfg, 1).unwrap();
        let total: f64 = t.leaves().keys().map(|k| t.box_width(k.level)).sum();
        assert!((total - 20.0).abs() < 1e-12);
        let mut keys: Vec<_> = t.leaves().keys().collect();
        keys.sort_by(|a, b| {
            let xa = a.l[0] as f64 * t.box_width(a.level);
            let xb = b.l[0] as f64 * t.box_width(b.level);
            xa.partial_cmp(&xb).unwrap()
        });
        let mut edge = 0.0;
        for k in keys {
            let lo = k.l[0] as f64 * t.box_width(k.level);
            assert!((lo - edge).abs() < 1e-12);
            edge = lo + t.box_width(k.level);
        }
    }
}
