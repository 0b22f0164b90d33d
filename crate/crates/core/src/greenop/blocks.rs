//! One-dimensional operator blocks of a Gaussian convolution between boxes
//! of the same level, shared through a process-wide cache.

use crate::mra::quadrature::{composite_rule, gauss_legendre, legendre_all};
use crate::mra::{basis_for, tensor};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

const PANEL_ORDER: usize = 24;

/// `G_ij(δ; t) = ∫_{-1}^{1} A_ij(z) exp(-t (δ + z)²) dz` with the
/// correlation `A_ij(z) = ∫ φ_i(v + z) φ_j(v) dv` of the unit-box scaling
/// functions. For a box of width `h` the convolution block with
/// `exp(-a x²)` is `h · G(δ; a h²)`, rows indexing the target box `l + δ`.
pub fn gauss_block(k: usize, t: f64, delta: i64) -> Vec<f64> {
    let mut out = vec![0.0; k * k];
    let z0 = -(delta as f64);
    let gap = (z0.abs() - 1.0).max(0.0);
    if t * gap * gap > 745.0 {
        return out;
    }
    let mut breaks = vec![-1.0, 0.0, 1.0];
    let sigma = 1.0 / t.sqrt();
    for p in -3..=8 {
        let d = sigma * 2f64.powi(p);
        breaks.push(z0 - d);
        breaks.push(z0 + d);
    }
    breaks.push(z0);
    if gap > 0.0 {
        let end = z0.signum();
        let lambda = 1.0 / (2.0 * t * gap);
        for p in -3..=8 {
            breaks.push(end - end * lambda * 2f64.powi(p));
        }
    }
    breaks.retain(|b| b.is_finite() && (-1.0..=1.0).contains(b));
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-15);

    let (zs, ws) = composite_rule(&breaks, PANEL_ORDER);
    let (vx, vw) = gauss_legendre(k);
    let mut pi = vec![0.0; k];
    let mut pj = vec![0.0; k];
    let mut corr = vec![0.0; k * k];
    for (&z, &w) in zs.iter().zip(&ws) {
        let g = w * (-t * (delta as f64 + z).powi(2)).exp();
        if g == 0.0 {
            continue;
        }
        // A(z) by k-point Gauss–Legendre on the overlap of the two boxes
        corr.iter_mut().for_each(|c| *c = 0.0);
        let lo = (-z).max(0.0);
        let len = 1.0 - z.abs();
        for (&x, &xw) in vx.iter().zip(&vw) {
            let v = lo + len * x;
            scaled_legendre(k, v + z, &mut pi);
            scaled_legendre(k, v, &mut pj);
            let wt = len * xw;
            for i in 0..k {
                let a = wt * pi[i];
                let row = &mut corr[i * k..(i + 1) * k];
                for (c, b) in row.iter_mut().zip(&pj) {
                    *c += a * b;
                }
            }
        }
        for (o, c) in out.iter_mut().zip(&corr) {
            *o += g * c;
        }
    }
    out
}

fn scaled_legendre(k: usize, x: f64, out: &mut [f64]) {
    legendre_all(k, 2.0 * x - 1.0, out);
    for (i, v) in out.iter_mut().enumerate() {
        *v *= ((2 * i + 1) as f64).sqrt();
    }
}

/// Operator data for one Gaussian term, level and displacement, divided by
/// the box width `h_n` of the source level.
#[derive(Debug)]
pub(crate) struct LevelBlock {
    /// `k × k` block at the source level, transposed
    pub parent_t: Vec<f64>,
    /// `2k × 2k` block between the children, transposed
    pub child_t: Vec<f64>,
    pub n_parent: f64,
    pub n_child: f64,
    /// `‖A Hᵀ − Hᵀ M‖_F`: the part of the child block not reproduced at the parent level
    pub n_smooth: f64,
    /// `‖A Gᵀ‖_F`: the child block acting on wavelets
    pub n_wave: f64,
}

type GaussKey = (usize, u64, i64);
type LevelKey = (usize, u64, u32, i64, i64);

fn gauss_cached(k: usize, t: f64, delta: i64) -> Arc<Vec<f64>> {
    static CACHE: OnceLock<Mutex<HashMap<GaussKey, Arc<Vec<f64>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (k, t.to_bits(), delta);
    if let Some(b) = cache.lock().expect("block cache poisoned").get(&key) {
        return b.clone();
    }
    let block = Arc::new(gauss_block(k, t, delta));
    cache.lock().expect("block cache poisoned").insert(key, block.clone());
    block
}

/// `t = a h²` for grid exponent index `e = 2j − 2nm` (see [`level_block`]).
pub(crate) fn scaled_exponent(half_width: f64, m: u32, e: i64) -> f64 {
    let w = 2.0 * half_width;
    w * w * 2f64.powf(e as f64 / m as f64)
}

/// Block for the grid exponent `a_j = 2^{2j/m}` at level `n`, keyed by
/// `e = 2j − 2nm` so that all `(j, n)` with equal `a_j h_n²` share storage.
pub(crate) fn level_block(k: usize, half_width: f64, m: u32, e: i64, delta: i64) -> Arc<LevelBlock> {
    static CACHE: OnceLock<Mutex<HashMap<LevelKey, Arc<LevelBlock>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (k, half_width.to_bits(), m, e, delta);
    if let Some(b) = cache.lock().expect("block cache poisoned").get(&key) {
        return b.clone();
    }
    let t = scaled_exponent(half_width, m, e);
    let t_child = scaled_exponent(half_width, m, e - 2 * m as i64);
    let parent = gauss_cached(k, t, delta);
    let k2 = 2 * k;
    let mut child = vec![0.0; k2 * k2];
    for tc in 0..2 {
        for bc in 0..2 {
            let g = gauss_cached(k, t_child, 2 * delta + tc as i64 - bc as i64);
            for i in 0..k {
                for j in 0..k {
                    child[(tc * k + i) * k2 + bc * k + j] = 0.5 * g[i * k + j];
                }
            }
        }
    }
    let basis = basis_for(k);
    let unfilter = &basis.unfilter; // 2k × k
    let mut diff = vec![0.0; k2 * k];
    for r in 0..k2 {
        for c in 0..k {
            let mut v = 0.0;
            for a in 0..k2 {
                v += child[r * k2 + a] * unfilter[a * k + c];
            }
            for a in 0..k {
                v -= unfilter[r * k + a] * parent[a * k + c];
            }
            diff[r * k + c] = v;
        }
    }
    let wavelet = &basis.wavelet_filter; // k × 2k
    let mut wave = vec![0.0; k2 * k];
    for r in 0..k2 {
        for c in 0..k {
            wave[r * k + c] = (0..k2).map(|a| child[r * k2 + a] * wavelet[c * k2 + a]).sum();
        }
    }
    let block = Arc::new(LevelBlock {
        parent_t: tensor::transpose(&parent, k, k),
        child_t: tensor::transpose(&child, k2, k2),
        n_parent: tensor::norm(&parent),
        n_child: tensor::norm(&child),
        n_smooth: tensor::norm(&diff),
        n_wave: tensor::norm(&wave),
    });
    cache.lock().expect("block cache poisoned").insert(key, block.clone());
    block
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mra::scaling_values;

    /// Brute-force double integral on a fine tensor grid.
    fn oracle(k: usize, t: f64, delta: i64) -> Vec<f64> {
        let breaks: Vec<f64> = (0..=64).map(|i| i as f64 / 64.0).collect();
        let (x, w) = composite_rule(&breaks, 12);
        let mut out = vec![0.0; k * k];
        for (&u, &wu) in x.iter().zip(&w) {
            let pu = scaling_values(k, u);
            for (&v, &wv) in x.iter().zip(&w) {
                let pv = scaling_values(k, v);
                let g = wu * wv * (-t * (delta as f64 + u - v).powi(2)).exp();
                for i in 0..k {
                    for j in 0..k {
                        out[i * k + j] += g * pu[i] * pv[j];
                    }
                }
            }
        }
        out
    }

    #[test]
    fn blocks_match_direct_double_integral() {
        for &(t, delta) in &[(0.01, 0), (0.5, 1), (3.0, -1), (20.0, 0), (2.0, 3)] {
            let a = gauss_block(5, t, delta);
            let b = oracle(5, t, delta);
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-11, "t={t} δ={delta}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn narrow_gaussian_block_is_scaled_identity() {
        let t = 1e10;
        let g = gauss_block(4, t, 0);
        let w = (std::f64::consts::PI / t).sqrt();
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { w } else { 0.0 };
                assert!((g[i * 4 + j] - expect).abs() < 1e-4 * w);
            }
        }
    }

    #[test]
    fn reversed_displacement_transposes() {
        let a = gauss_block(4, 1.3, 2);
        let b = gauss_block(4, 1.3, -2);
        for i in 0..4 {
            for j in 0..4 {
                assert!((a[i * 4 + j] - b[j * 4 + i]).abs() < 1e-14);
            }
        }
    }
}
