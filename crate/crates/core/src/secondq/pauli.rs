//! Pauli strings and complex-coefficient polynomials over them.

use num_complex::Complex64;
use std::collections::BTreeMap;
use std::fmt;

/// Coefficients below this magnitude are dropped from polynomials.
pub const PRUNE: f64 = 1e-14;

/// Maximum supported qubit count (bit-mask representation).
pub const MAX_QUBITS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    X,
    Y,
    Z,
}

/// Tensor product of single-qubit Paulis, identity elsewhere.
///
/// Stored as bit masks: qubit `q` carries X if only bit `q` of `x` is set,
/// Z if only the `z` bit is set and Y if both are.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct PauliString {
    x: u64,
    z: u64,
}

impl PauliString {
    pub const IDENTITY: PauliString = PauliString { x: 0, z: 0 };

    pub fn new(letters: &[(usize, Pauli)]) -> Self {
        let mut s = Self::IDENTITY;
        for &(q, p) in letters {
            assert!(q < MAX_QUBITS, "qubit index {q} out of range");
            assert!(s.get(q).is_none(), "qubit {q} repeated in Pauli string");
            s.set(q, Some(p));
        }
        s
    }

    pub fn single(q: usize, p: Pauli) -> Self {
        Self::new(&[(q, p)])
    }

    pub fn from_masks(x: u64, z: u64) -> Self {
        Self { x, z }
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn get(&self, q: usize) -> Option<Pauli> {
        match ((self.x >> q) & 1, (self.z >> q) & 1) {
            (0, 0) => None,
            (1, 0) => Some(Pauli::X),
            (1, 1) => Some(Pauli::Y),
            _ => Some(Pauli::Z),
        }
    }

    fn set(&mut self, q: usize, p: Option<Pauli>) {
        let bit = 1u64 << q;
        let (x, z) = match p {
            None => (false, false),
            Some(Pauli::X) => (true, false),
            Some(Pauli::Y) => (true, true),
            Some(Pauli::Z) => (false, true),
        };
        self.x = if x { self.x | bit } else { self.x & !bit };
        self.z = if z { self.z | bit } else { self.z & !bit };
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn support(&self) -> u64 {
        self.x | self.z
    }

    pub fn weight(&self) -> usize {
        self.support().count_ones() as usize
    }

    /// `(qubit, letter)` pairs in ascending qubit order.
    pub fn letters(&self) -> Vec<(usize, Pauli)> {
        let mut out = Vec::new();
        let mut s = self.support();
        while s != 0 {
            let q = s.trailing_zeros() as usize;
            out.push((q, self.get(q).unwrap()));
            s &= s - 1;
        }
        out
    }

    /// `self · other = phase · result`.
    pub fn mul(&self, other: &PauliString) -> (Complex64, PauliString) {
        let x = self.x ^ other.x;
        let z = self.z ^ other.z;
        // With P = i^{|x∧z|} X^x Z^z, moving Z^{z1} past X^{x2} gives (−1)^{|z1∧x2|}.
        let p1 = (self.x & self.z).count_ones() as i64;
        let p2 = (other.x & other.z).count_ones() as i64;
        let p3 = (x & z).count_ones() as i64;
        let sign = 2 * (self.z & other.x).count_ones() as i64;
        let power = (p1 + p2 - p3 + sign).rem_euclid(4);
        (i_pow(power), PauliString { x, z })
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()) % 2 == 0
    }

    /// `P|i⟩ = phase · |i ⊕ x⟩`.
    #[inline]
    pub fn apply_to_basis(&self, i: u64) -> (Complex64, u64) {
        let ny = (self.x & self.z).count_ones() as i64;
        let nz = (i & self.z).count_ones() as i64;
        (i_pow(ny + 2 * nz), i ^ self.x)
    }
}

fn i_pow(p: i64) -> Complex64 {
    match p.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return write!(f, "I");
        }
        let parts: Vec<String> = self
            .letters()
            .into_iter()
            .map(|(q, p)| format!("{:?}{q}", p))
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// `Σ_k c_k P_k` with pruned zero coefficients.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PauliPolynomial {
    terms: BTreeMap<PauliString, Complex64>,
}

impl PauliPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn identity() -> Self {
        Self::term(PauliString::IDENTITY, Complex64::new(1.0, 0.0))
    }

    pub fn term(p: PauliString, c: Complex64) -> Self {
        let mut out = Self::zero();
        out.add_term(p, c);
        out
    }

    /// Sums the given terms (repeated strings accumulate).
    pub fn from_terms(terms: impl IntoIterator<Item = (PauliString, Complex64)>) -> Self {
        let mut acc: BTreeMap<PauliString, Complex64> = BTreeMap::new();
        for (p, c) in terms {
            *acc.entry(p).or_default() += c;
        }
        acc.retain(|_, c| c.norm() >= PRUNE);
        Self { terms: acc }
    }

    pub fn add_term(&mut self, p: PauliString, c: Complex64) {
        let e = self.terms.entry(p).or_insert(Complex64::new(0.0, 0.0));
        *e += c;
        if e.norm() < PRUNE {
            self.terms.remove(&p);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PauliString, &Complex64)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, p: &PauliString) -> Complex64 {
        self.terms.get(p).copied().unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// One more than the highest qubit index acted on.
    pub fn num_qubits(&self) -> usize {
        self.terms
            .keys()
            .map(|p| 64 - p.support().leading_zeros() as usize)
            .max()
            .unwrap_or(0)
    }

    pub fn add(&self, other: &PauliPolynomial) -> PauliPolynomial {
        let mut out = self.clone();
        for (p, c) in &other.terms {
            out.add_term(*p, *c);
        }
        out
    }

    pub fn sub(&self, other: &PauliPolynomial) -> PauliPolynomial {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> PauliPolynomial {
        let mut out = Self::zero();
        for (p, v) in &self.terms {
            out.add_term(*p, v * c);
        }
        out
    }

    pub fn mul(&self, other: &PauliPolynomial) -> PauliPolynomial {
        let mut acc: BTreeMap<PauliString, Complex64> = BTreeMap::new();
        for (p, a) in &self.terms {
            for (q, b) in &other.terms {
                let (phase, r) = p.mul(q);
                *acc.entry(r).or_default() += phase * a * b;
            }
        }
        acc.retain(|_, c| c.norm() >= PRUNE);
        PauliPolynomial { terms: acc }
    }

    /// `AB + BA`.
    pub fn anticommutator(&self, other: &PauliPolynomial) -> PauliPolynomial {
        self.mul(other).add(&other.mul(self))
    }

    /// `AB − BA`.
    pub fn commutator(&self, other: &PauliPolynomial) -> PauliPolynomial {
        self.mul(other).sub(&other.mul(self))
    }

    /// Hermitian conjugate (Pauli strings are Hermitian).
    pub fn adjoint(&self) -> PauliPolynomial {
        PauliPolynomial {
            terms: self.terms.iter().map(|(p, c)| (*p, c.conj())).collect(),
        }
    }

    /// Largest imaginary part of any coefficient.
    pub fn max_imaginary(&self) -> f64 {
        self.terms.values().map(|c| c.im.abs()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_imaginary() <= tol
    }

    /// Drops imaginary parts (after a Hermiticity check by the caller).
    pub fn real_part(&self) -> PauliPolynomial {
        let mut out = Self::zero();
        for (p, c) in &self.terms {
            out.add_term(*p, Complex64::new(c.re, 0.0));
        }
        out
    }

    /// Largest coefficient magnitude (0 for the zero polynomial).
    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Dense `2^n × 2^n` matrix (row-major), for small verification cases.
    pub fn to_dense(&self, n_qubits: usize) -> Vec<Complex64> {
        assert!(n_qubits <= 14, "dense matrix for {n_qubits} qubits is too large");
        let dim = 1usize << n_qubits;
        let mut m = vec![Complex64::default(); dim * dim];
        for (p, c) in &self.terms {
            for col in 0..dim as u64 {
                let (phase, row) = p.apply_to_basis(col);
                m[row as usize * dim + col as usize] += c * phase;
            }
        }
        m
    }
}

impl fmt::Display for PauliPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (p, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({:+.6}{:+.6}i) [{p}]", c.re, c.im)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C;

    fn mat(p: Pauli) -> [[C; 2]; 2] {
        let (o, z, i) = (C::new(1.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 1.0));
        match p {
            Pauli::X => [[z, o], [o, z]],
            Pauli::Y => [[z, -i], [i, z]],
            Pauli::Z => [[o, z], [z, -o]],
        }
    }

    #[test]
    fn single_qubit_products_match_matrices() {
        let all = [Pauli::X, Pauli::Y, Pauli::Z];
        for &a in &all {
            for &b in &all {
                let (phase, r) = PauliString::single(0, a).mul(&PauliString::single(0, b));
                let (ma, mb) = (mat(a), mat(b));
                let mut prod = [[C::default(); 2]; 2];
                for i in 0..2 {
                    for j in 0..2 {
                        for k in 0..2 {
                            prod[i][j] += ma[i][k] * mb[k][j];
                        }
                    }
                }
                let mr = match r.get(0) {
                    None => [[C::new(1.0, 0.0), C::default()], [C::default(), C::new(1.0, 0.0)]],
                    Some(p) => mat(p),
                };
                for i in 0..2 {
                    for j in 0..2 {
                        assert!((prod[i][j] - phase * mr[i][j]).norm() < 1e-15, "{a:?}{b:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn xy_is_i_z() {
        let (phase, r) = PauliString::single(3, Pauli::X).mul(&PauliString::single(3, Pauli::Y));
        assert_eq!(r, PauliString::single(3, Pauli::Z));
        assert_eq!(phase, C::new(0.0, 1.0));
    }

    #[test]
    fn basis_action_matches_dense_matrix() {
        let p = PauliString::new(&[(0, Pauli::Y), (1, Pauli::Z), (2, Pauli::X)]);
        let poly = PauliPolynomial::term(p, C::new(1.0, 0.0));
        let m = poly.to_dense(3);
        // squares to identity
        for i in 0..8 {
            for j in 0..8 {
                let v: C = (0..8).map(|k| m[i * 8 + k] * m[k * 8 + j]).sum();
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((v - C::new(e, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn zero_coefficients_are_pruned() {
        let p = PauliPolynomial::term(PauliString::single(0, Pauli::X), C::new(1.0, 0.0));
        assert!(p.sub(&p).is_empty());
    }

    #[test]
    fn display_lists_letters_by_qubit() {
        let p = PauliString::new(&[(4, Pauli::Z), (1, Pauli::X)]);
        assert_eq!(p.to_string(), "X1 Z4");
    }
}
