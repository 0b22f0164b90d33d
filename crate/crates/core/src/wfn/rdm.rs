//! Spin-summed one- and two-body reduced density matrices.
//!
//! `D1[k, l] = Σ_σ ⟨a†_kσ a_lσ⟩` and
//! `D2[k, l, m, n] = Σ_στ ⟨a†_kσ a†_lτ a_nτ a_mσ⟩`, stored flat like the
//! two-electron integrals so that `E = Σ D1·h + ½ Σ D2·g + E_const`.

use super::sector::{annihilate, create};
use super::{expectation, QubitState, WfnError};
use crate::secondq::{jordan_wigner, spin_orbital, transform4, Ladder};
use nalgebra::DMatrix;
use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct SpinSummedRdms {
    pub n: usize,
    pub d1: DMatrix<f64>,
    pub d2: Vec<f64>,
}

/// Violations of the N-representability conditions checked by [`SpinSummedRdms::check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RdmDiagnostics {
    pub trace_error: f64,
    pub symmetry_error: f64,
    /// distance of the D1 spectrum outside `[0, 2]`
    pub occupation_error: f64,
    pub partial_trace_error: f64,
    pub pair_symmetry_error: f64,
}

impl RdmDiagnostics {
    pub fn max(&self) -> f64 {
        [
            self.trace_error,
            self.symmetry_error,
            self.occupation_error,
            self.partial_trace_error,
            self.pair_symmetry_error,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

impl SpinSummedRdms {
    #[inline]
    pub fn index(&self, k: usize, l: usize, m: usize, n: usize) -> usize {
        ((k * self.n + l) * self.n + m) * self.n + n
    }

    #[inline]
    pub fn d2(&self, k: usize, l: usize, m: usize, n: usize) -> f64 {
        self.d2[self.index(k, l, m, n)]
    }

    pub fn num_electrons(&self) -> f64 {
        self.d1.trace()
    }

    /// Closed-shell determinant with orbitals `0..n_occ` doubly occupied.
    pub fn closed_shell(n: usize, n_occ: usize) -> Self {
        let mut r = Self {
            n,
            d1: DMatrix::zeros(n, n),
            d2: vec![0.0; n.pow(4)],
        };
        for i in 0..n_occ {
            r.d1[(i, i)] = 2.0;
            for j in 0..n_occ {
                let a = r.index(i, j, i, j);
                r.d2[a] += 4.0;
                let b = r.index(i, j, j, i);
                r.d2[b] -= 2.0;
            }
        }
        r
    }

    /// Densities in the rotated basis `φ'_j = Σ_i φ_i U_ij` (U orthogonal).
    pub fn transform(&self, u: &DMatrix<f64>) -> SpinSummedRdms {
        SpinSummedRdms {
            n: u.ncols(),
            d1: u.transpose() * &self.d1 * u,
            d2: transform4(&self.d2, self.n, u),
        }
    }

    pub fn diagnostics(&self, n_elec: usize) -> RdmDiagnostics {
        let n = self.n;
        let ne = n_elec as f64;
        let sym = (&self.d1 - self.d1.transpose()).amax();
        let eig = ((&self.d1 + self.d1.transpose()) * 0.5).symmetric_eigen();
        let occ = eig
            .eigenvalues
            .iter()
            .map(|&x| (-x).max(x - 2.0).max(0.0))
            .fold(0.0, f64::max);
        let mut pt: f64 = 0.0;
        for k in 0..n {
            for m in 0..n {
                let s: f64 = (0..n).map(|l| self.d2(k, l, m, l)).sum();
                pt = pt.max((s - (ne - 1.0) * self.d1[(k, m)]).abs());
            }
        }
        let mut pair: f64 = 0.0;
        for k in 0..n {
            for l in 0..n {
                for m in 0..n {
                    for nn in 0..n {
                        pair = pair.max((self.d2(k, l, m, nn) - self.d2(l, k, nn, m)).abs());
                    }
                }
            }
        }
        RdmDiagnostics {
            trace_error: (self.num_electrons() - ne).abs(),
            symmetry_error: sym,
            occupation_error: occ,
            partial_trace_error: pt,
            pair_symmetry_error: pair,
        }
    }

    /// Errors if any diagnostic exceeds `tol`.
    pub fn check(&self, n_elec: usize, tol: f64) -> Result<(), WfnError> {
        let d = self.diagnostics(n_elec);
        if d.max() > tol {
            return Err(WfnError::InvalidRdm(format!("{d:?}")));
        }
        Ok(())
    }
}

fn check_norm(psi: &QubitState) -> Result<(), WfnError> {
    let nrm = psi.norm();
    if (nrm - 1.0).abs() > 1e-8 {
        return Err(WfnError::NotNormalized(nrm));
    }
    Ok(())
}

/// Densities by applying the ladder operators to the occupied support of `ψ`.
pub fn measure_rdms(psi: &QubitState, n_spatial: usize) -> Result<SpinSummedRdms, WfnError> {
    check_norm(psi)?;
    if psi.n_qubits() < 2 * n_spatial {
        return Err(WfnError::Dimension(format!(
            "{} qubits cannot hold {n_spatial} spatial orbitals",
            psi.n_qubits()
        )));
    }
    let n = n_spatial;
    let amps = psi.amplitudes();
    let mut d1 = DMatrix::<Complex64>::zeros(n, n);
    let mut d2 = vec![Complex64::default(); n.pow(4)];
    let nso = 2 * n;
    for (det, c) in psi.support() {
        let occ: Vec<usize> = (0..nso).filter(|&q| det >> q & 1 == 1).collect();
        for &ql in &occ {
            let (l, s) = (ql / 2, ql % 2);
            let (s1, d_1) = annihilate(det, ql).unwrap();
            for k in 0..n {
                if let Some((s2, d_2)) = create(d_1, spin_orbital(k, s)) {
                    d1[(k, l)] += amps[d_2 as usize].conj() * c * (s1 * s2);
                }
            }
        }
        for &qm in &occ {
            let (m, s) = (qm / 2, qm % 2);
            let (s1, e1) = annihilate(det, qm).unwrap();
            for &qn in &occ {
                if qn == qm {
                    continue;
                }
                let (nn, u) = (qn / 2, qn % 2);
                let (s2, e2) = annihilate(e1, qn).unwrap();
                for l in 0..n {
                    let Some((s3, e3)) = create(e2, spin_orbital(l, u)) else { continue };
                    for k in 0..n {
                        if let Some((s4, e4)) = create(e3, spin_orbital(k, s)) {
                            let amp = amps[e4 as usize];
                            if amp.norm_sqr() != 0.0 {
                                d2[((k * n + l) * n + m) * n + nn] += amp.conj() * c * (s1 * s2 * s3 * s4);
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(SpinSummedRdms {
        n,
        d1: d1.map(|z| z.re),
        d2: d2.iter().map(|z| z.re).collect(),
    })
}

/// Densities from Jordan–Wigner Pauli expectations (slow reference path).
pub fn measure_rdms_pauli(psi: &QubitState, n_spatial: usize) -> Result<SpinSummedRdms, WfnError> {
    check_norm(psi)?;
    let n = n_spatial;
    let mut d1 = DMatrix::zeros(n, n);
    let mut d2 = vec![0.0; n.pow(4)];
    let herm = |ops: &[Ladder]| {
        // ⟨A⟩ real part via the Hermitian combination (A + A†)/2
        let a = jordan_wigner(ops);
        a.add(&a.adjoint()).scale(Complex64::new(0.5, 0.0))
    };
    for k in 0..n {
        for l in 0..n {
            for s in 0..2 {
                let op = herm(&[Ladder::create(spin_orbital(k, s)), Ladder::annihilate(spin_orbital(l, s))]);
                d1[(k, l)] += expectation(&op, psi)?;
            }
        }
    }
    for k in 0..n {
        for l in 0..n {
            for m in 0..n {
                for nn in 0..n {
                    let mut v = 0.0;
                    for s in 0..2 {
                        for u in 0..2 {
                            let op = herm(&[
                                Ladder::create(spin_orbital(k, s)),
                                Ladder::create(spin_orbital(l, u)),
                                Ladder::annihilate(spin_orbital(nn, u)),
                                Ladder::annihilate(spin_orbital(m, s)),
                            ]);
                            if !op.is_empty() {
                                v += expectation(&op, psi)?;
                            }
                        }
                    }
                    d2[((k * n + l) * n + m) * n + nn] = v;
                }
            }
        }
    }
    Ok(SpinSummedRdms { n, d1, d2 })
}
