//! Application of a separated kernel to a 3D tree in the non-standard form.
//!
//! For every interior source box `B` at level `n` the operator contributes
//! `P_{n+1} T X_B − P_n T s_B` to the boxes `B + δ`, where `X_B` is the
//! children block of `B` and `s_B` its own scaling block; the root adds
//! `P_0 T s_root`. Contributions are screened with a bound that separates
//! the wavelet part of `X_B` from its parent-level part, accumulated per
//! target box in source order, and finally summed down the tree.

use super::blocks::{level_block, LevelBlock};
use super::{GreenError, SeparatedKernel};
use crate::mra::{tensor, FunctionTree, NodeKey};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

/// Screening tolerance relative to the tree threshold (before division by
/// `√(number of terms)`).
pub const DEFAULT_SCREEN: f64 = 0.1;

struct TermLevel {
    /// (δ, block) pairs for `|δ| ≤ R`
    blocks: Vec<(i64, Arc<LevelBlock>)>,
    max_any: f64,
    max_wave: f64,
    max_smooth: f64,
}

/// `(kern ∗ f)(r) = ∫ K(|r − r'|) f(r') dr'` for a 3D tree.
pub fn apply(kern: &SeparatedKernel, f: &FunctionTree) -> Result<FunctionTree, GreenError> {
    apply_with_screen(kern, f, DEFAULT_SCREEN)
}

pub fn apply_with_screen(kern: &SeparatedKernel, f: &FunctionTree, screen: f64) -> Result<FunctionTree, GreenError> {
    if f.dim() != 3 {
        return Err(GreenError::Dimension(f.dim()));
    }
    let (r_lo, r_hi) = kern.range();
    let diameter = 2.0 * 3f64.sqrt() * f.half_width();
    let finest = f.box_width(f.depth());
    if r_hi < diameter * (1.0 - 1e-9) || r_lo > finest.max(1e-4) * (1.0 + 1e-9) {
        return Err(GreenError::DomainCoverage {
            r_lo,
            r_hi,
            needed_lo: finest.max(1e-4),
            needed_hi: diameter,
        });
    }
    let k = f.order();
    let k2 = 2 * k;
    let m = kern.subdivision();
    let nterms = kern.num_terms().max(1);
    let tol = f.thresh() * screen / (nterms as f64).sqrt();
    let comp = f.compressed();

    let mut acc: HashMap<NodeKey, Vec<f64>> = HashMap::new();

    // level-0 projection of the whole operator
    {
        let s = &comp[&NodeKey::ROOT];
        let h = f.box_width(0);
        let mut total = vec![0.0; k * k * k];
        for term in kern.terms() {
            let e = 2 * term.grid_index;
            let blk = level_block(k, f.half_width(), m, e, 0);
            let w = term.coeff * h * h * h;
            let p = contract3(s, k, [&blk.parent_t, &blk.parent_t, &blk.parent_t]);
            for (t, v) in total.iter_mut().zip(p) {
                *t += w * v;
            }
        }
        acc.insert(NodeKey::ROOT, total);
    }

    let mut sources: Vec<NodeKey> = comp.keys().filter(|key| !f.leaves().contains_key(key)).copied().collect();
    sources.sort();

    // largest source norms per level bound the displacement ranges
    let mut level_norm: BTreeMap<u8, f64> = BTreeMap::new();
    let mut prepared = Vec::with_capacity(sources.len());
    for key in &sources {
        let kids: Vec<&[f64]> = key.children(3).map(|c| comp[&c].as_slice()).collect();
        let x = tensor::assemble_children(&kids, k, 3);
        let s = comp[key].clone();
        let back = f.unfilter(&s);
        let dn = x.iter().zip(&back).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        let sn = tensor::norm(&s);
        let e = level_norm.entry(key.level).or_insert(0.0);
        *e = e.max(dn + sn);
        prepared.push((x, s, dn, sn));
    }

    let mut term_levels: HashMap<(usize, u8), Option<TermLevel>> = HashMap::new();
    let mut applied = 0usize;
    for (key, (x, s, dn, sn)) in sources.iter().zip(&prepared) {
        let n = key.level;
        let h = f.box_width(n);
        let extent = 1i64 << n;
        for (ti, term) in kern.terms().iter().enumerate() {
            let w = term.coeff * h * h * h;
            let tl = term_levels.entry((ti, n)).or_insert_with(|| {
                build_term_level(k, f.half_width(), m, term.grid_index, n, w, level_norm[&n], tol)
            });
            let Some(tl) = tl.as_ref() else { continue };
            // the difference operator leaks through one axis at a time:
            // wavelets via ‖A Gᵀ‖, parent-level content via ‖A Hᵀ − Hᵀ M‖
            let leak = |b: &LevelBlock| dn * b.n_wave + sn * b.n_smooth;
            let mx = tl.max_any;
            let lmax = dn * tl.max_wave + sn * tl.max_smooth;
            if w * 3.0 * lmax * mx * mx < tol {
                continue;
            }
            for (dx, bx) in &tl.blocks {
                let tx = key.l[0] as i64 + dx;
                if tx < 0 || tx >= extent {
                    continue;
                }
                let (lx, nx) = (leak(bx), x_norm(bx));
                if w * (lx * mx * mx + 2.0 * nx * lmax * mx) < tol {
                    continue;
                }
                let t1 = contract(x, k2, &bx.child_t);
                let p1 = contract(s, k, &bx.parent_t);
                for (dy, by) in &tl.blocks {
                    let ty = key.l[1] as i64 + dy;
                    if ty < 0 || ty >= extent {
                        continue;
                    }
                    let (ly, ny) = (leak(by), x_norm(by));
                    if w * ((lx * ny + nx * ly) * mx + nx * ny * lmax) < tol {
                        continue;
                    }
                    let t2 = contract(&t1, k2, &by.child_t);
                    let p2 = contract(&p1, k, &by.parent_t);
                    for (dz, bz) in &tl.blocks {
                        let tz = key.l[2] as i64 + dz;
                        if tz < 0 || tz >= extent {
                            continue;
                        }
                        let (lz, nz) = (leak(bz), x_norm(bz));
                        if w * (lx * ny * nz + nx * ly * nz + nx * ny * lz) < tol {
                            continue;
                        }
                        let t3 = contract(&t2, k2, &bz.child_t);
                        let p3 = contract(&p2, k, &bz.parent_t);
                        let target = NodeKey::new(n, [tx as u32, ty as u32, tz as u32]);
                        scatter_children(&mut acc, &target, &t3, k, w);
                        let slot = acc.entry(target).or_insert_with(|| vec![0.0; k * k * k]);
                        for (a, v) in slot.iter_mut().zip(&p3) {
                            *a -= w * v;
                        }
                        applied += 1;
                    }
                }
            }
        }
    }
    log::debug!(
        "applied {} block contributions from {} sources ({} terms)",
        applied,
        sources.len(),
        kern.num_terms()
    );

    let leaves = sum_down(f, acc);
    let mut out = FunctionTree::from_leaves(f.dim(), f.basis_arc(), f.half_width(), f.thresh(), f.max_depth(), leaves);
    out.truncate();
    Ok(out)
}

fn x_norm(b: &LevelBlock) -> f64 {
    b.n_child.max(b.n_parent)
}

#[allow(clippy::too_many_arguments)]
fn build_term_level(
    k: usize,
    half_width: f64,
    m: u32,
    j: i64,
    n: u8,
    w: f64,
    fmax: f64,
    tol: f64,
) -> Option<TermLevel> {
    let e = 2 * j - 2 * n as i64 * m as i64;
    let centre = level_block(k, half_width, m, e, 0);
    let x0 = x_norm(&centre);
    let l0 = centre.n_wave.max(centre.n_smooth);
    let extent = 1i64 << n;
    let mut blocks = vec![(0i64, centre.clone())];
    for d in 1..extent {
        let plus = level_block(k, half_width, m, e, d);
        let minus = level_block(k, half_width, m, e, -d);
        let reach = [&plus, &minus]
            .iter()
            .map(|b| b.n_wave.max(b.n_smooth) * x0 * x0 + 2.0 * x_norm(b) * l0 * x0)
            .fold(0.0, f64::max);
        if w * reach * fmax < 1e-3 * tol {
            break;
        }
        blocks.push((-d, minus));
        blocks.push((d, plus));
    }
    blocks.sort_by_key(|(d, _)| *d);
    let max_any = blocks.iter().map(|(_, b)| x_norm(b)).fold(0.0, f64::max);
    let max_wave = blocks.iter().map(|(_, b)| b.n_wave).fold(0.0, f64::max);
    let max_smooth = blocks.iter().map(|(_, b)| b.n_smooth).fold(0.0, f64::max);
    if w * 3.0 * max_wave.max(max_smooth) * max_any * max_any * fmax < tol {
        return None;
    }
    Some(TermLevel {
        blocks,
        max_any,
        max_wave,
        max_smooth,
    })
}

fn scatter_children(acc: &mut HashMap<NodeKey, Vec<f64>>, target: &NodeKey, big: &[f64], k: usize, w: f64) {
    let k2 = 2 * k;
    for c in 0..8usize {
        let child = target.child(c, 3);
        let slot = acc.entry(child).or_insert_with(|| vec![0.0; k * k * k]);
        let (c0, c1, c2) = ((c >> 2) & 1, (c >> 1) & 1, c & 1);
        for i in 0..k {
            for j in 0..k {
                let src = ((c0 * k + i) * k2 + c1 * k + j) * k2 + c2 * k;
                let dst = (i * k + j) * k;
                for (a, v) in slot[dst..dst + k].iter_mut().zip(&big[src..src + k]) {
                    *a += w * v;
                }
            }
        }
    }
}

/// Converts per-box contributions into a reconstructed tree.
fn sum_down(f: &FunctionTree, acc: HashMap<NodeKey, Vec<f64>>) -> BTreeMap<NodeKey, Vec<f64>> {
    let kd = f.order().pow(3);
    let mut nodes: BTreeSet<NodeKey> = BTreeSet::new();
    for key in acc.keys() {
        let mut cur = *key;
        while nodes.insert(cur) {
            match cur.parent() {
                Some(p) => cur = p,
                None => break,
            }
        }
    }
    let parents: BTreeSet<NodeKey> = nodes.iter().filter_map(|k| k.parent()).collect();
    for p in &parents {
        for c in p.children(3) {
            nodes.insert(c);
        }
    }
    let mut totals: BTreeMap<NodeKey, Vec<f64>> = nodes
        .iter()
        .map(|k| (*k, acc.get(k).cloned().unwrap_or_else(|| vec![0.0; kd])))
        .collect();
    // BTreeMap order is level-major, so parents are finished before children
    for key in nodes.iter() {
        if !parents.contains(key) {
            continue;
        }
        let s = totals.remove(key).expect("node present");
        for (c, block) in key.children(3).zip(f.split_block(&s)) {
            let slot = totals.get_mut(&c).expect("children present");
            for (a, v) in slot.iter_mut().zip(block) {
                *a += v;
            }
        }
    }
    totals
}

/// Contracts the leading index of an `m³` block with `mt` (`m × m`,
/// transposed operator) and appends the new index last.
fn contract(input: &[f64], m: usize, mt: &[f64]) -> Vec<f64> {
    let rest = m * m;
    assert!(input.len() == rest * m && mt.len() == m * m);
    let mut out = vec![0.0; rest * m];
    // C (rest × m) = A (rest × m) · B (m × m) with A(b, a) = input[a·rest + b];
    // the asserted lengths keep every strided access in bounds.
    unsafe {
        matrixmultiply::dgemm(
            rest,
            m,
            m,
            1.0,
            input.as_ptr(),
            1,
            rest as isize,
            mt.as_ptr(),
            m as isize,
            1,
            0.0,
            out.as_mut_ptr(),
            m as isize,
            1,
        );
    }
    out
}

fn contract3(input: &[f64], m: usize, mts: [&[f64]; 3]) -> Vec<f64> {
    let a = contract(input, m, mts[0]);
    let b = contract(&a, m, mts[1]);
    contract(&b, m, mts[2])
}
