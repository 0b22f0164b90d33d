use super::quadrature::{gauss_legendre, legendre_all, legendre_with_derivative};
use super::tensor::transpose;
use nalgebra::DMatrix;

/// Legendre multiwavelet basis of order `k` on the unit interval.
///
/// Scaling functions are `φ_i(x) = √(2i+1) P_i(2x − 1)`, orthonormal on
/// `[0, 1]`. The two-scale filter `H` (k × 2k) maps the scaling
/// coefficients of the two children to those of the parent; `G` spans the
/// orthogonal complement (the wavelet part).
#[derive(Debug, Clone)]
pub struct MultiwaveletBasis {
    k: usize,
    pub(crate) quad_x: Vec<f64>,
    pub(crate) quad_w: Vec<f64>,
    /// `q × k`: φ_i at the quadrature points
    pub(crate) phi_quad: Vec<f64>,
    /// `k × q`: w_p φ_i(x_p)
    pub(crate) proj_quad: Vec<f64>,
    /// `k × 2k`
    pub(crate) filter: Vec<f64>,
    /// `2k × k`
    pub(crate) unfilter: Vec<f64>,
    /// `k × 2k`
    pub(crate) wavelet_filter: Vec<f64>,
    /// derivative blocks (self, right neighbour, left neighbour)
    pub(crate) deriv_r0: Vec<f64>,
    pub(crate) deriv_rp: Vec<f64>,
    pub(crate) deriv_rm: Vec<f64>,
}

impl MultiwaveletBasis {
    pub fn new(k: usize) -> Self {
        assert!(k >= 1);
        let (quad_x, quad_w) = gauss_legendre(k);
        let q = quad_x.len();
        let mut phi_quad = vec![0.0; q * k];
        for (p, &x) in quad_x.iter().enumerate() {
            phi_quad[p * k..(p + 1) * k].copy_from_slice(&scaling_values(k, x));
        }
        let mut proj_quad = vec![0.0; k * q];
        for i in 0..k {
            for p in 0..q {
                proj_quad[i * q + p] = quad_w[p] * phi_quad[p * k + i];
            }
        }

        // H[i][c*k + j] = <φ_i, √2 φ_j(2x - c)> = (1/√2) ∫ φ_i((y + c)/2) φ_j(y) dy
        let mut filter = vec![0.0; k * 2 * k];
        for c in 0..2 {
            for (p, &y) in quad_x.iter().enumerate() {
                let outer = scaling_values(k, (y + c as f64) / 2.0);
                for i in 0..k {
                    for j in 0..k {
                        filter[i * 2 * k + c * k + j] +=
                            quad_w[p] * outer[i] * phi_quad[p * k + j] / std::f64::consts::SQRT_2;
                    }
                }
            }
        }
        let unfilter = transpose(&filter, k, 2 * k);
        let wavelet_filter = orthogonal_complement(&filter, k);

        let phi0 = scaling_values(k, 0.0);
        let phi1 = scaling_values(k, 1.0);
        // stiffness K_ij = ∫ φ_i' φ_j
        let mut stiff = vec![0.0; k * k];
        for (p, &x) in quad_x.iter().enumerate() {
            let dphi = scaling_derivatives(k, x);
            for i in 0..k {
                for j in 0..k {
                    stiff[i * k + j] += quad_w[p] * dphi[i] * phi_quad[p * k + j];
                }
            }
        }
        let mut deriv_r0 = vec![0.0; k * k];
        let mut deriv_rp = vec![0.0; k * k];
        let mut deriv_rm = vec![0.0; k * k];
        for i in 0..k {
            for j in 0..k {
                deriv_r0[i * k + j] = 0.5 * (phi1[i] * phi1[j] - phi0[i] * phi0[j]) - stiff[i * k + j];
                deriv_rp[i * k + j] = 0.5 * phi1[i] * phi0[j];
                deriv_rm[i * k + j] = -0.5 * phi0[i] * phi1[j];
            }
        }

        Self {
            k,
            quad_x,
            quad_w,
            phi_quad,
            proj_quad,
            filter,
            unfilter,
            wavelet_filter,
            deriv_r0,
            deriv_rp,
            deriv_rm,
        }
    }

    pub fn order(&self) -> usize {
        self.k
    }

    pub fn quadrature(&self) -> (&[f64], &[f64]) {
        (&self.quad_x, &self.quad_w)
    }

    /// Scaling→scaling filter blocks `(H0, H1)`, each `k × k`.
    pub fn scaling_filters(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        let k = self.k;
        let h = DMatrix::from_row_slice(k, 2 * k, &self.filter);
        (h.columns(0, k).into_owned(), h.columns(k, k).into_owned())
    }

    /// Scaling→wavelet filter blocks `(G0, G1)`, each `k × k`.
    pub fn wavelet_filters(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        let k = self.k;
        let g = DMatrix::from_row_slice(k, 2 * k, &self.wavelet_filter);
        (g.columns(0, k).into_owned(), g.columns(k, k).into_owned())
    }

    /// The combined `2k × 2k` two-scale matrix `[H; G]`.
    pub fn two_scale_matrix(&self) -> DMatrix<f64> {
        let k = self.k;
        let mut m = DMatrix::zeros(2 * k, 2 * k);
        for i in 0..k {
            for j in 0..2 * k {
                m[(i, j)] = self.filter[i * 2 * k + j];
                m[(k + i, j)] = self.wavelet_filter[i * 2 * k + j];
            }
        }
        m
    }
}

/// `φ_i(x)` for `i < k`.
pub fn scaling_values(k: usize, x: f64) -> Vec<f64> {
    let mut p = vec![0.0; k];
    legendre_all(k, 2.0 * x - 1.0, &mut p);
    for (i, v) in p.iter_mut().enumerate() {
        *v *= (2.0 * i as f64 + 1.0).sqrt();
    }
    p
}

fn scaling_derivatives(k: usize, x: f64) -> Vec<f64> {
    (0..k)
        .map(|i| 2.0 * (2.0 * i as f64 + 1.0).sqrt() * legendre_with_derivative(i, 2.0 * x - 1.0).1)
        .collect()
}

/// Orthonormal rows spanning the complement of the row space of `h` (k × 2k).
fn orthogonal_complement(h: &[f64], k: usize) -> Vec<f64> {
    let n = 2 * k;
    let ht = DMatrix::from_row_slice(k, n, h).transpose();
    // extend the k orthonormal columns with unit vectors, then Gram-Schmidt twice
    let mut basis: Vec<Vec<f64>> = (0..k).map(|c| ht.column(c).iter().copied().collect()).collect();
    let mut out = Vec::with_capacity(k * n);
    for e in 0..n {
        if basis.len() == n {
            break;
        }
        let mut v = vec![0.0; n];
        v[e] = 1.0;
        for _ in 0..2 {
            for b in &basis {
                let proj: f64 = b.iter().zip(&v).map(|(x, y)| x * y).sum();
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= proj * bi;
                }
            }
        }
        let nrm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nrm > 1e-6 {
            for vi in v.iter_mut() {
                *vi /= nrm;
            }
            out.extend_from_slice(&v);
            basis.push(v);
        }
    }
    assert_eq!(out.len(), k * n, "two-scale complement has wrong rank");
    out
}
