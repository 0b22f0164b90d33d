//! Dense tensor-product transforms on coefficient blocks.
//!
//! Blocks are stored row-major with the first dimension slowest. A transform
//! contracts each dimension with its own matrix; every pass contracts the
//! leading index and appends the new one at the end, so after `d` passes the
//! original dimension order is restored.

/// Applies `mats[0] ⊗ … ⊗ mats[d-1]` to `input`. Every matrix is `p × m`,
/// row-major. The input has `m^d` entries and the output `p^d`.
pub fn transform(input: &[f64], m: usize, p: usize, mats: &[&[f64]]) -> Vec<f64> {
    let d = mats.len();
    debug_assert_eq!(input.len(), m.pow(d as u32));
    let mut cur = input.to_vec();
    let mut rest = m.pow(d as u32 - 1);
    let mut lead = m;
    for (pass, mat) in mats.iter().enumerate() {
        debug_assert_eq!(mat.len(), p * lead);
        let mt = transpose(mat, p, lead);
        let mut out = vec![0.0; rest * p];
        for a in 0..lead {
            let row = &cur[a * rest..(a + 1) * rest];
            let mrow = &mt[a * p..(a + 1) * p];
            for (bc, &t) in row.iter().enumerate() {
                if t == 0.0 {
                    continue;
                }
                let o = &mut out[bc * p..(bc + 1) * p];
                for (oi, mi) in o.iter_mut().zip(mrow) {
                    *oi += t * mi;
                }
            }
        }
        cur = out;
        if pass + 1 < d {
            // the next leading dimension still has extent m
            rest = rest / m * p;
            lead = m;
        }
    }
    cur
}

/// Accumulates `scale * (mats ⊗) input` into `acc` (square matrices only).
pub fn transform_accumulate(acc: &mut [f64], input: &[f64], m: usize, mats: &[&[f64]], scale: f64) {
    let t = transform(input, m, m, mats);
    for (a, v) in acc.iter_mut().zip(t) {
        *a += scale * v;
    }
}

/// Applies the `p × m` matrix along a single axis of a `m^d` block, leaving
/// the other axes untouched (extent `m`).
pub fn apply_axis(input: &[f64], m: usize, d: usize, axis: usize, mat: &[f64], p: usize) -> Vec<f64> {
    let outer = m.pow(axis as u32);
    let inner = m.pow((d - axis - 1) as u32);
    let mut out = vec![0.0; outer * p * inner];
    for o in 0..outer {
        for r in 0..p {
            let dst = &mut out[(o * p + r) * inner..(o * p + r + 1) * inner];
            for c in 0..m {
                let coef = mat[r * m + c];
                if coef == 0.0 {
                    continue;
                }
                let src = &input[(o * m + c) * inner..(o * m + c + 1) * inner];
                for (dv, sv) in dst.iter_mut().zip(src) {
                    *dv += coef * sv;
                }
            }
        }
    }
    out
}

pub fn transpose(mat: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    let mut t = vec![0.0; rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            t[c * rows + r] = mat[r * cols + c];
        }
    }
    t
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Scatters the `2^d` child blocks (each `k^d`) into one `(2k)^d` block.
pub fn assemble_children(children: &[&[f64]], k: usize, d: usize) -> Vec<f64> {
    let big = 2 * k;
    let mut out = vec![0.0; big.pow(d as u32)];
    let kd = k.pow(d as u32);
    for (c, block) in children.iter().enumerate() {
        for idx in 0..kd {
            out[child_to_big(c, idx, k, d)] = block[idx];
        }
    }
    out
}

/// Extracts child `c` (bit `d-1-q` of `c` selects the half along axis `q`).
pub fn extract_child(big: &[f64], c: usize, k: usize, d: usize) -> Vec<f64> {
    let kd = k.pow(d as u32);
    (0..kd).map(|idx| big[child_to_big(c, idx, k, d)]).collect()
}

#[inline]
fn child_to_big(c: usize, idx: usize, k: usize, d: usize) -> usize {
    let big = 2 * k;
    let mut rem = idx;
    let mut out = 0;
    let mut stride_small = k.pow(d as u32);
    for q in 0..d {
        stride_small /= k;
        let i = rem / stride_small;
        rem %= stride_small;
        let bit = (c >> (d - 1 - q)) & 1;
        out = out * big + bit * k + i;
    }
    out
}
