use super::WfnError;
use crate::secondq::{PauliPolynomial, PauliString};
use num_complex::Complex64;

/// Largest qubit count simulated as a dense statevector.
pub const MAX_STATEVECTOR_QUBITS: usize = 26;

/// Dense statevector; bit `q` of a basis index is the occupation of qubit `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitState {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl QubitState {
    /// Computational basis state `|index⟩`.
    pub fn basis(n_qubits: usize, index: u64) -> Result<Self, WfnError> {
        if n_qubits > MAX_STATEVECTOR_QUBITS {
            return Err(WfnError::TooLarge(n_qubits));
        }
        let dim = 1usize << n_qubits;
        if index as usize >= dim {
            return Err(WfnError::Dimension(format!("basis index {index} for {n_qubits} qubits")));
        }
        let mut amps = vec![Complex64::default(); dim];
        amps[index as usize] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    pub fn from_amplitudes(n_qubits: usize, amps: Vec<Complex64>) -> Result<Self, WfnError> {
        if amps.len() != 1usize << n_qubits {
            return Err(WfnError::Dimension(format!(
                "{} amplitudes for {n_qubits} qubits",
                amps.len()
            )));
        }
        Ok(Self { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        self.amps.iter_mut().for_each(|a| *a /= n);
    }

    /// Applies `exp(−i φ P)` in place.
    pub fn apply_pauli_rotation(&mut self, p: &PauliString, phi: f64) {
        let (c, s) = (phi.cos(), phi.sin());
        let mis = Complex64::new(0.0, -s);
        if p.is_identity() {
            let f = Complex64::new(c, -s);
            self.amps.iter_mut().for_each(|a| *a *= f);
            return;
        }
        let x = p.x_mask();
        // pair each index with its partner i ⊕ x; visit each pair once
        let pivot = 1u64 << (63 - x.leading_zeros());
        for i in 0..self.amps.len() as u64 {
            if i & pivot != 0 {
                continue;
            }
            let j = i ^ x;
            let (ph_i, _) = p.apply_to_basis(i); // P|i⟩ = ph_i |j⟩
            let (ph_j, _) = p.apply_to_basis(j); // P|j⟩ = ph_j |i⟩
            let (ai, aj) = (self.amps[i as usize], self.amps[j as usize]);
            self.amps[i as usize] = c * ai + mis * ph_j * aj;
            self.amps[j as usize] = c * aj + mis * ph_i * ai;
        }
    }

    /// `P|ψ⟩`.
    pub fn apply_pauli(&self, p: &PauliString) -> QubitState {
        let mut out = vec![Complex64::default(); self.amps.len()];
        for (i, a) in self.amps.iter().enumerate() {
            let (ph, j) = p.apply_to_basis(i as u64);
            out[j as usize] += ph * a;
        }
        QubitState {
            n_qubits: self.n_qubits,
            amps: out,
        }
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &QubitState) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// `⟨ψ|P|ψ⟩` for one Pauli string.
    pub fn pauli_expectation(&self, p: &PauliString) -> Complex64 {
        let mut acc = Complex64::default();
        for (i, a) in self.amps.iter().enumerate() {
            if a.norm_sqr() == 0.0 {
                continue;
            }
            let (ph, j) = p.apply_to_basis(i as u64);
            acc += self.amps[j as usize].conj() * ph * a;
        }
        acc
    }

    /// Indices with non-zero amplitude.
    pub fn support(&self) -> impl Iterator<Item = (u64, Complex64)> + '_ {
        self.amps
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm_sqr() > 0.0)
            .map(|(i, a)| (i as u64, *a))
    }
}

/// Largest imaginary part of an expectation value treated as round-off.
pub const IMAGINARY_TOL: f64 = 1e-10;

/// `⟨ψ|H|ψ⟩` by direct Pauli-term evaluation.
pub fn expectation(h: &PauliPolynomial, psi: &QubitState) -> Result<f64, WfnError> {
    if !h.is_hermitian(IMAGINARY_TOL) {
        return Err(WfnError::NotHermitian(h.max_imaginary()));
    }
    let mut acc = Complex64::default();
    for (p, c) in h.terms() {
        acc += c * psi.pauli_expectation(p);
    }
    if acc.im.abs() > IMAGINARY_TOL * (1.0 + acc.re.abs()) {
        return Err(WfnError::NotHermitian(acc.im));
    }
    Ok(acc.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::secondq::Pauli;

    #[test]
    fn z_on_zero_and_x_on_plus() {
        let zero = QubitState::basis(1, 0).unwrap();
        let z = PauliPolynomial::term(PauliString::single(0, Pauli::Z), Complex64::new(1.0, 0.0));
        assert_eq!(expectation(&z, &zero).unwrap(), 1.0);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus = QubitState::from_amplitudes(1, vec![Complex64::new(h, 0.0); 2]).unwrap();
        let x = PauliPolynomial::term(PauliString::single(0, Pauli::X), Complex64::new(1.0, 0.0));
        assert!((expectation(&x, &plus).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rotation_matches_closed_form() {
        // exp(−iφY)|0⟩ = cos φ |0⟩ + sin φ |1⟩
        let mut s = QubitState::basis(2, 0).unwrap();
        s.apply_pauli_rotation(&PauliString::single(1, Pauli::Y), 0.3);
        assert!((s.amplitudes()[0].re - 0.3f64.cos()).abs() < 1e-15);
        assert!((s.amplitudes()[2].re - 0.3f64.sin()).abs() < 1e-15);
    }

    #[test]
    fn rotation_preserves_norm() {
        let mut s = QubitState::basis(3, 5).unwrap();
        let p = PauliString::new(&[(0, Pauli::X), (1, Pauli::Y), (2, Pauli::Z)]);
        for k in 0..10 {
            s.apply_pauli_rotation(&p, 0.37 * k as f64);
        }
        assert!((s.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn non_hermitian_observable_is_rejected() {
        let s = QubitState::basis(1, 0).unwrap();
        let h = PauliPolynomial::term(PauliString::single(0, Pauli::Z), Complex64::new(0.0, 1.0));
        assert!(matches!(expectation(&h, &s), Err(WfnError::NotHermitian(_))));
    }
}
