//! Fixed particle-number, `S_z = 0` sectors over interleaved spin orbitals.

use super::{QubitState, WfnError};
use crate::secondq::PauliPolynomial;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::collections::HashMap;

/// Mask of the ↑ qubits (even indices) among the first `2n`.
fn alpha_mask(n_spatial: usize) -> u64 {
    (0..n_spatial).fold(0, |m, k| m | (1u64 << (2 * k)))
}

/// Sign `(−1)^{number of occupied orbitals below q}` of moving a ladder
/// operator on `q` through the Jordan–Wigner string.
#[inline]
pub fn parity_below(det: u64, q: usize) -> f64 {
    if (det & ((1u64 << q) - 1)).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `a_q |det⟩` as `(sign, det')`, or `None` if `q` is empty.
#[inline]
pub fn annihilate(det: u64, q: usize) -> Option<(f64, u64)> {
    (det >> q & 1 == 1).then(|| (parity_below(det, q), det & !(1u64 << q)))
}

/// `a†_q |det⟩` as `(sign, det')`, or `None` if `q` is occupied.
#[inline]
pub fn create(det: u64, q: usize) -> Option<(f64, u64)> {
    (det >> q & 1 == 0).then(|| (parity_below(det, q), det | (1u64 << q)))
}

/// Determinants with `n_elec / 2` electrons of each spin, sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorBasis {
    pub n_spatial: usize,
    pub n_elec: usize,
    states: Vec<u64>,
    index: HashMap<u64, usize>,
}

impl SectorBasis {
    pub fn new(n_spatial: usize, n_elec: usize) -> Result<Self, WfnError> {
        if n_elec % 2 != 0 {
            return Err(WfnError::Sector(format!("{n_elec} electrons cannot have S_z = 0")));
        }
        if n_elec / 2 > n_spatial {
            return Err(WfnError::Sector(format!(
                "{n_elec} electrons do not fit in {n_spatial} spatial orbitals"
            )));
        }
        if 2 * n_spatial > 62 {
            return Err(WfnError::TooLarge(2 * n_spatial));
        }
        let half = (n_elec / 2) as u32;
        let am = alpha_mask(n_spatial);
        let bm = am << 1;
        let mut states = Vec::new();
        let alphas = combinations(n_spatial, half);
        for &a in &alphas {
            for &b in &alphas {
                states.push(spread(a, 0) | spread(b, 1));
            }
        }
        states.sort_unstable();
        debug_assert!(states.iter().all(|s| (s & am).count_ones() == half && (s & bm).count_ones() == half));
        let index = states.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        Ok(Self {
            n_spatial,
            n_elec,
            states,
            index,
        })
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[u64] {
        &self.states
    }

    pub fn position(&self, det: u64) -> Option<usize> {
        self.index.get(&det).copied()
    }

    pub fn n_qubits(&self) -> usize {
        2 * self.n_spatial
    }

    /// Embeds sector amplitudes into a full statevector.
    pub fn to_state(&self, v: &DVector<f64>) -> Result<QubitState, WfnError> {
        let mut amps = vec![Complex64::default(); 1usize << self.n_qubits()];
        for (&s, &c) in self.states.iter().zip(v.iter()) {
            amps[s as usize] = Complex64::new(c, 0.0);
        }
        QubitState::from_amplitudes(self.n_qubits(), amps)
    }

    /// Sector amplitudes of a statevector (components outside are dropped).
    pub fn project(&self, psi: &QubitState) -> Vec<Complex64> {
        self.states.iter().map(|&s| psi.amplitudes()[s as usize]).collect()
    }

    /// Real matrix of a Pauli-form operator restricted to the sector.
    pub fn pauli_matrix(&self, op: &PauliPolynomial) -> Result<DMatrix<f64>, WfnError> {
        let d = self.dim();
        let mut m = DMatrix::<Complex64>::zeros(d, d);
        for (col, &s) in self.states.iter().enumerate() {
            for (p, c) in op.terms() {
                let (ph, t) = p.apply_to_basis(s);
                if let Some(row) = self.position(t) {
                    m[(row, col)] += c * ph;
                }
            }
        }
        let imag = m.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        if imag > 1e-10 {
            return Err(WfnError::NotHermitian(imag));
        }
        Ok(m.map(|z| z.re))
    }
}

/// Places bit `i` of `bits` at position `2i + offset`.
fn spread(bits: u64, offset: usize) -> u64 {
    let mut out = 0;
    let mut b = bits;
    while b != 0 {
        let i = b.trailing_zeros() as usize;
        out |= 1u64 << (2 * i + offset);
        b &= b - 1;
    }
    out
}

fn combinations(n: usize, k: u32) -> Vec<u64> {
    (0..1u64 << n).filter(|b| b.count_ones() == k).collect()
}

/// Real symmetric operator on sector amplitudes; evaluates energies of
/// particle-conserving states without touching the full Pauli sum.
#[derive(Debug, Clone)]
pub struct SectorOperator {
    pub basis: SectorBasis,
    pub matrix: DMatrix<f64>,
}

impl SectorOperator {
    pub fn from_pauli(op: &PauliPolynomial, n_spatial: usize, n_elec: usize) -> Result<Self, WfnError> {
        let basis = SectorBasis::new(n_spatial, n_elec)?;
        let matrix = basis.pauli_matrix(op)?;
        Ok(Self { basis, matrix })
    }
}
