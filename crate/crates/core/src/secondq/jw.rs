//! Jordan–Wigner encoding of fermionic ladder operators.
//!
//! `a†_k = (Π_{l<k} Z_l) · ½(X_k − iY_k)` realizes `|1⟩⟨0|` on qubit `k`;
//! `a_k` is its adjoint.

use super::pauli::{Pauli, PauliPolynomial, PauliString};
use num_complex::Complex64;

/// Creation (`dagger`) or annihilation operator on spin orbital `index`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ladder {
    pub index: usize,
    pub dagger: bool,
}

impl Ladder {
    pub fn create(index: usize) -> Self {
        Self { index, dagger: true }
    }

    pub fn annihilate(index: usize) -> Self {
        Self { index, dagger: false }
    }
}

/// Qubit image of a single ladder operator.
pub fn ladder(op: Ladder) -> PauliPolynomial {
    let k = op.index;
    let z_string = if k == 0 { 0 } else { (1u64 << k) - 1 };
    let bit = 1u64 << k;
    let x = PauliString::from_masks(bit, z_string);
    let y = PauliString::from_masks(bit, z_string | bit);
    let sign = if op.dagger { -1.0 } else { 1.0 };
    let mut out = PauliPolynomial::term(x, Complex64::new(0.5, 0.0));
    out.add_term(y, Complex64::new(0.0, 0.5 * sign));
    out
}

/// Qubit image of an ordered product of ladder operators (leftmost first).
pub fn jordan_wigner(ops: &[Ladder]) -> PauliPolynomial {
    ops.iter()
        .fold(PauliPolynomial::identity(), |acc, &op| acc.mul(&ladder(op)))
}

/// `n̂_k = a†_k a_k = ½(I − Z_k)`.
pub fn number_operator(k: usize) -> PauliPolynomial {
    let mut out = PauliPolynomial::identity().scale(Complex64::new(0.5, 0.0));
    out.add_term(PauliString::single(k, Pauli::Z), Complex64::new(-0.5, 0.0));
    out
}

/// `Σ_k n̂_k` over `n_qubits` spin orbitals.
pub fn total_number(n_qubits: usize) -> PauliPolynomial {
    (0..n_qubits).fold(PauliPolynomial::zero(), |acc, k| acc.add(&number_operator(k)))
}

/// `S²` for interleaved spin orbitals (`2p` = ↑, `2p+1` = ↓) over `n_spatial` orbitals.
pub fn s_squared(n_spatial: usize) -> PauliPolynomial {
    let c = |x: f64| Complex64::new(x, 0.0);
    let mut sz = PauliPolynomial::zero();
    let mut s_plus = PauliPolynomial::zero();
    for p in 0..n_spatial {
        sz = sz.add(&number_operator(2 * p).sub(&number_operator(2 * p + 1)).scale(c(0.5)));
        s_plus = s_plus.add(&jordan_wigner(&[Ladder::create(2 * p), Ladder::annihilate(2 * p + 1)]));
    }
    let s_minus = s_plus.adjoint();
    // S² = S₋S₊ + S_z(S_z + 1)
    s_minus
        .mul(&s_plus)
        .add(&sz.mul(&sz))
        .add(&sz)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn creation_on_first_qubit() {
        let p = ladder(Ladder::create(0));
        assert_eq!(p.coefficient(&PauliString::single(0, Pauli::X)), Complex64::new(0.5, 0.0));
        assert_eq!(p.coefficient(&PauliString::single(0, Pauli::Y)), Complex64::new(0.0, -0.5));
        assert_eq!(p.len(), 2);
    }

    #[test]
    fn creation_raises_the_qubit() {
        // |1⟩⟨0|: maps basis 0 to basis 1 with unit amplitude
        let m = ladder(Ladder::create(0)).to_dense(1);
        assert!((m[2] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(m[0].norm() + m[1].norm() + m[3].norm() < 1e-15);
    }

    #[test]
    fn number_operator_form() {
        let n = jordan_wigner(&[Ladder::create(0), Ladder::annihilate(0)]);
        assert_eq!(n, number_operator(0));
    }

    #[test]
    fn distinct_modes_anticommute() {
        let a0 = ladder(Ladder::annihilate(0));
        let c1 = ladder(Ladder::create(1));
        assert!(a0.anticommutator(&c1).is_empty());
        let c0 = ladder(Ladder::create(0));
        assert_eq!(a0.anticommutator(&c0), PauliPolynomial::identity());
    }
}
