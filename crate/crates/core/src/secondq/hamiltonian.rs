//! Qubit Hamiltonian from spatial-orbital integrals.

use super::jw::{ladder, Ladder};
use super::pauli::{PauliPolynomial, PauliString};
use super::{IntegralTensors, SecondqError};
use num_complex::Complex64;
use std::collections::HashMap;

/// Largest imaginary coefficient tolerated before Hermiticity is enforced.
const HERMITICITY_TOL: f64 = 1e-10;

/// Jordan–Wigner image of the spin-summed electronic Hamiltonian; qubit
/// `2k` is spatial orbital `k` with spin ↑ and `2k + 1` the same with spin ↓.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedHamiltonian {
    pub poly: PauliPolynomial,
    pub n_qubits: usize,
}

impl EncodedHamiltonian {
    pub fn num_terms(&self) -> usize {
        self.poly.len()
    }
}

/// Qubit index of spatial orbital `k` with spin `s` (0 = ↑, 1 = ↓).
#[inline]
pub fn spin_orbital(k: usize, s: usize) -> usize {
    2 * k + s
}

/// `H = Σ h_kl a†_kσ a_lσ + ½ Σ ⟨kl|mn⟩ a†_kσ a†_lτ a_nτ a_mσ + E_const`.
pub fn encode_hamiltonian(t: &IntegralTensors) -> Result<EncodedHamiltonian, SecondqError> {
    let n = t.n();
    let nq = 2 * n;
    if nq > super::pauli::MAX_QUBITS {
        return Err(SecondqError::Invalid(format!("{nq} qubits exceed the supported maximum")));
    }
    if t.h().iter().chain(t.g_data()).any(|v| !v.is_finite()) || !t.e_const.is_finite() {
        return Err(SecondqError::Invalid("NaN or infinite integral".into()));
    }
    let create: Vec<PauliPolynomial> = (0..nq).map(|p| ladder(Ladder::create(p))).collect();
    let annihilate: Vec<PauliPolynomial> = (0..nq).map(|p| ladder(Ladder::annihilate(p))).collect();
    let mut acc: HashMap<PauliString, Complex64> = HashMap::new();
    let mut push = |poly: &PauliPolynomial, c: f64| {
        for (p, v) in poly.terms() {
            *acc.entry(*p).or_default() += v * c;
        }
    };
    push(&PauliPolynomial::identity(), t.e_const);
    for k in 0..n {
        for l in 0..n {
            let h = t.h()[(k, l)];
            if h == 0.0 {
                continue;
            }
            for s in 0..2 {
                let op = create[spin_orbital(k, s)].mul(&annihilate[spin_orbital(l, s)]);
                push(&op, h);
            }
        }
    }
    // a†_p a†_q and a_s a_r pair operators
    let mut pair_c: HashMap<(usize, usize), PauliPolynomial> = HashMap::new();
    let mut pair_a: HashMap<(usize, usize), PauliPolynomial> = HashMap::new();
    for k in 0..n {
        for l in 0..n {
            for m in 0..n {
                for nn in 0..n {
                    let g = t.g(k, l, m, nn);
                    if g == 0.0 {
                        continue;
                    }
                    for s in 0..2 {
                        for u in 0..2 {
                            let (p, q) = (spin_orbital(k, s), spin_orbital(l, u));
                            let (r, w) = (spin_orbital(m, s), spin_orbital(nn, u));
                            if p == q || r == w {
                                continue;
                            }
                            let a = pair_c.entry((p, q)).or_insert_with(|| create[p].mul(&create[q])).clone();
                            let b = pair_a.entry((w, r)).or_insert_with(|| annihilate[w].mul(&annihilate[r]));
                            push(&a.mul(b), 0.5 * g);
                        }
                    }
                }
            }
        }
    }
    let poly = PauliPolynomial::from_terms(acc);
    if !poly.is_hermitian(HERMITICITY_TOL) {
        return Err(SecondqError::Invalid(format!(
            "encoded Hamiltonian is not Hermitian (imaginary part {:e})",
            poly.max_imaginary()
        )));
    }
    let poly = poly.real_part();
    log::debug!("encoded Hamiltonian: {} qubits, {} Pauli terms", nq, poly.len());
    Ok(EncodedHamiltonian { poly, n_qubits: nq })
}

#[cfg(test)]
mod tests {
    use super::super::jw::number_operator;
    use super::*;
    use nalgebra::DMatrix;

    fn dense_real(h: &EncodedHamiltonian) -> DMatrix<f64> {
        let dim = 1usize << h.n_qubits;
        let m = h.poly.to_dense(h.n_qubits);
        DMatrix::from_fn(dim, dim, |i, j| m[i * dim + j].re)
    }

    #[test]
    fn one_orbital_spectrum() {
        let (hv, gv) = (-0.8, 0.45);
        let mut t = IntegralTensors::zeros(1);
        t.h_mut()[(0, 0)] = hv;
        t.set_g(0, 0, 0, 0, gv);
        let enc = encode_hamiltonian(&t).unwrap();
        let mut ev: Vec<f64> = dense_real(&enc).symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut expect = vec![0.0, hv, hv, 2.0 * hv + gv];
        expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in ev.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-12, "{ev:?} vs {expect:?}");
        }
    }

    #[test]
    fn one_body_hamiltonian_conserves_each_occupation() {
        let mut t = IntegralTensors::zeros(2);
        t.h_mut()[(0, 0)] = -1.0;
        t.h_mut()[(1, 1)] = 0.3;
        let enc = encode_hamiltonian(&t).unwrap();
        for q in 0..4 {
            assert!(enc.poly.commutator(&number_operator(q)).is_empty());
        }
    }
}
