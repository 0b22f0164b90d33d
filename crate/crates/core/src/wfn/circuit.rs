//! Parametrized circuits: a reference determinant followed by exponentials
//! of commuting-term generators, `U(θ) = exp(−i θ/2 · G)`.

use super::{QubitState, WfnError};
use crate::secondq::{jordan_wigner, spin_orbital, Ladder, PauliPolynomial, PauliString};
use num_complex::Complex64;
use std::fmt;

/// How the derivative of a gate angle is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftRule {
    /// generator with eigenvalues ±1: two evaluations at ±π/2
    TwoTerm,
    /// generator with eigenvalues {−1, 0, 1}: four evaluations at ±π/2, ±3π/2
    FourTerm,
    /// anything else: central finite difference
    FiniteDifference,
}

#[derive(Debug, Clone)]
pub struct Gate {
    /// real-coefficient, mutually commuting Pauli terms of `G`
    pub terms: Vec<(PauliString, f64)>,
    pub param: usize,
    pub rule: ShiftRule,
    pub label: String,
}

impl Gate {
    /// Gate from a Hermitian generator; errors if the terms do not commute
    /// or carry imaginary coefficients.
    pub fn new(generator: &PauliPolynomial, param: usize, rule: ShiftRule, label: impl Into<String>) -> Result<Self, WfnError> {
        if !generator.is_hermitian(1e-12) {
            return Err(WfnError::InvalidCircuit("generator is not Hermitian".into()));
        }
        let terms: Vec<(PauliString, f64)> = generator.terms().map(|(p, c)| (*p, c.re)).collect();
        for (i, (a, _)) in terms.iter().enumerate() {
            for (b, _) in &terms[..i] {
                if !a.commutes_with(b) {
                    return Err(WfnError::InvalidCircuit(format!("generator terms {a} and {b} do not commute")));
                }
            }
        }
        Ok(Self {
            terms,
            param,
            rule,
            label: label.into(),
        })
    }

    pub fn generator(&self) -> PauliPolynomial {
        PauliPolynomial::from_terms(self.terms.iter().map(|(p, c)| (*p, Complex64::new(*c, 0.0))))
    }

    /// Applies `exp(−i θ/2 · G)`.
    pub fn apply(&self, psi: &mut QubitState, theta: f64) {
        for (p, c) in &self.terms {
            psi.apply_pauli_rotation(p, 0.5 * theta * c);
        }
    }
}

#[derive(Debug, Clone)]
pub struct Circuit {
    pub n_qubits: usize,
    /// basis state prepared by X gates before the parametrized part
    pub reference: u64,
    pub gates: Vec<Gate>,
    pub n_params: usize,
}

impl Circuit {
    pub fn new(n_qubits: usize, reference: u64) -> Self {
        Self {
            n_qubits,
            reference,
            gates: Vec::new(),
            n_params: 0,
        }
    }

    /// Appends gates sharing one new parameter; returns its index.
    pub fn push_parameter(&mut self, gates: Vec<(PauliPolynomial, ShiftRule, String)>) -> Result<usize, WfnError> {
        let idx = self.n_params;
        for (g, rule, label) in gates {
            self.gates.push(Gate::new(&g, idx, rule, label)?);
        }
        self.n_params += 1;
        Ok(idx)
    }

    /// Exact statevector `U(θ)|reference⟩`.
    pub fn prepare(&self, theta: &[f64]) -> Result<QubitState, WfnError> {
        self.prepare_shifted(theta, None)
    }

    /// Like [`Circuit::prepare`], with gate `g` (an index into `gates`)
    /// given the extra angle `shift`.
    pub fn prepare_shifted(&self, theta: &[f64], shift: Option<(usize, f64)>) -> Result<QubitState, WfnError> {
        if theta.len() != self.n_params {
            return Err(WfnError::Dimension(format!(
                "{} parameters supplied, circuit has {}",
                theta.len(),
                self.n_params
            )));
        }
        let mut psi = QubitState::basis(self.n_qubits, self.reference)?;
        for (i, gate) in self.gates.iter().enumerate() {
            let mut a = theta[gate.param];
            if let Some((g, s)) = shift {
                if g == i {
                    a += s;
                }
            }
            gate.apply(&mut psi, a);
        }
        Ok(psi)
    }
}

/// Ansatz families built on the separable pair approximation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AnsatzVariant {
    Spa,
    SpaGs,
    SpaGsd,
}

impl AnsatzVariant {
    pub fn label(&self) -> &'static str {
        match self {
            AnsatzVariant::Spa => "SPA",
            AnsatzVariant::SpaGs => "SPA+GS",
            AnsatzVariant::SpaGsd => "SPA+GSD",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_uppercase().as_str() {
            "SPA" => Some(Self::Spa),
            "SPA+GS" => Some(Self::SpaGs),
            "SPA+GSD" => Some(Self::SpaGsd),
            _ => None,
        }
    }
}

impl fmt::Display for AnsatzVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Default pair groups: the `N_e/2` occupied orbitals (listed first) each
/// head a group, and the remaining orbitals are split into contiguous
/// blocks of as-equal-as-possible size, earlier groups taking the extras.
pub fn default_groups(n_spatial: usize, n_elec: usize) -> Result<Vec<Vec<usize>>, WfnError> {
    if n_elec % 2 != 0 || n_elec == 0 {
        return Err(WfnError::InvalidCircuit(format!("SPA needs a positive even electron count, got {n_elec}")));
    }
    let p = n_elec / 2;
    if n_spatial < p {
        return Err(WfnError::InvalidCircuit(format!(
            "{n_spatial} orbitals cannot hold {p} electron pairs"
        )));
    }
    let nv = n_spatial - p;
    let mut groups: Vec<Vec<usize>> = (0..p).map(|i| vec![i]).collect();
    let mut next = p;
    for (g, group) in groups.iter_mut().enumerate() {
        let size = nv / p + usize::from(g < nv % p);
        group.extend(next..next + size);
        next += size;
    }
    Ok(groups)
}

/// `i(A − A†)` for the given excitation `A`.
fn anti_hermitian_generator(a: &[Ladder]) -> PauliPolynomial {
    let op = jordan_wigner(a);
    op.sub(&op.adjoint()).scale(Complex64::new(0.0, 1.0))
}

/// Generator of the paired double `i → a` (both electrons of spatial `i` to `a`).
pub fn paired_double(a: usize, i: usize) -> PauliPolynomial {
    anti_hermitian_generator(&[
        Ladder::create(spin_orbital(a, 0)),
        Ladder::create(spin_orbital(a, 1)),
        Ladder::annihilate(spin_orbital(i, 1)),
        Ladder::annihilate(spin_orbital(i, 0)),
    ])
}

/// Generator of the single excitation `q → p` for one spin.
pub fn single(p: usize, q: usize, spin: usize) -> PauliPolynomial {
    anti_hermitian_generator(&[Ladder::create(spin_orbital(p, spin)), Ladder::annihilate(spin_orbital(q, spin))])
}

/// SPA circuit and its GS/GSD extensions. `groups` defaults to
/// [`default_groups`]; each group must contain exactly one of the
/// reference-occupied orbitals `0..N_e/2`.
pub fn build_spa_gsd(
    n_spatial: usize,
    n_elec: usize,
    variant: AnsatzVariant,
    groups: Option<&[Vec<usize>]>,
) -> Result<Circuit, WfnError> {
    let groups = match groups {
        Some(g) => g.to_vec(),
        None => default_groups(n_spatial, n_elec)?,
    };
    let p = n_elec / 2;
    let mut seen = vec![false; n_spatial];
    for g in &groups {
        let occ: Vec<&usize> = g.iter().filter(|&&o| o < p).collect();
        if occ.len() != 1 {
            return Err(WfnError::InvalidCircuit(format!("group {g:?} must contain exactly one occupied orbital")));
        }
        for &o in g {
            if o >= n_spatial || std::mem::replace(&mut seen[o], true) {
                return Err(WfnError::InvalidCircuit(format!("invalid or repeated orbital {o} in groups")));
            }
        }
    }
    if groups.len() != p {
        return Err(WfnError::InvalidCircuit(format!("{} groups for {p} pairs", groups.len())));
    }
    let reference = (0..2 * p).fold(0u64, |m, q| m | (1u64 << q));
    let mut c = Circuit::new(2 * n_spatial, reference);
    let mut doubles: Vec<(usize, usize)> = Vec::new();
    for g in &groups {
        let i = *g.iter().find(|&&o| o < p).unwrap();
        for &a in g.iter().filter(|&&o| o != i) {
            c.push_parameter(vec![(paired_double(a, i), ShiftRule::FourTerm, format!("D({i}->{a})"))])?;
            doubles.push((i.min(a), i.max(a)));
        }
    }
    if variant == AnsatzVariant::SpaGsd {
        for q in 0..n_spatial {
            for pp in q + 1..n_spatial {
                if !doubles.contains(&(q, pp)) {
                    c.push_parameter(vec![(paired_double(pp, q), ShiftRule::FourTerm, format!("GD({q}->{pp})"))])?;
                }
            }
        }
    }
    if variant != AnsatzVariant::Spa {
        for q in 0..n_spatial {
            for pp in q + 1..n_spatial {
                c.push_parameter(vec![
                    (single(pp, q, 0), ShiftRule::FourTerm, format!("GS({q}->{pp})a")),
                    (single(pp, q, 1), ShiftRule::FourTerm, format!("GS({q}->{pp})b")),
                ])?;
            }
        }
    }
    Ok(c)
}
