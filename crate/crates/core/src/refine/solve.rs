use super::RefineError;
use crate::secondq::{encode_hamiltonian, IntegralTensors};
use crate::wfn::{build_spa_gsd, fci, measure_rdms, vqe, AnsatzVariant, SectorOperator, SpinSummedRdms, VqeOptions};

/// Tolerance of the energy-from-densities contract with the solver.
pub const RDM_ENERGY_TOL: f64 = 1e-8;

/// Wavefunction solver used in each macro-iteration.
#[derive(Debug, Clone, PartialEq)]
pub enum SolverSpec {
    Fci,
    Vqe {
        variant: AnsatzVariant,
        restarts: usize,
        seed: u64,
    },
}

impl SolverSpec {
    /// `FCI`, `SPA`, `SPA+GS` or `SPA+GSD`.
    pub fn label(&self) -> &'static str {
        match self {
            SolverSpec::Fci => "FCI",
            SolverSpec::Vqe { variant, .. } => variant.label(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolverOutput {
    pub energy: f64,
    pub rdms: SpinSummedRdms,
    /// optimal circuit parameters (VQE only)
    pub theta: Option<Vec<f64>>,
}

/// Ground state of `t` with `n_elec` electrons and its spin-summed densities.
/// The energy recomputed from the densities must match the solver energy.
pub fn solve(
    t: &IntegralTensors,
    n_elec: usize,
    spec: &SolverSpec,
    groups: Option<&[Vec<usize>]>,
    warm_start: Option<&[f64]>,
) -> Result<SolverOutput, RefineError> {
    let n = t.n();
    let (energy, state, theta) = match spec {
        SolverSpec::Fci => {
            let res = fci(t, n_elec)?;
            (res.energy, res.state()?, None)
        }
        SolverSpec::Vqe { variant, restarts, seed } => {
            let circuit = build_spa_gsd(n, n_elec, *variant, groups)?;
            let poly = encode_hamiltonian(t)?.poly;
            let op = SectorOperator::from_pauli(&poly, n, n_elec)?;
            let opts = VqeOptions {
                restarts: *restarts,
                seed: *seed,
                warm_start: warm_start.filter(|w| w.len() == circuit.n_params).map(<[f64]>::to_vec),
                ..VqeOptions::default()
            };
            let res = vqe(&op, &circuit, &opts)?;
            let state = circuit.prepare(&res.theta)?;
            (res.energy, state, Some(res.theta))
        }
    };
    let rdms = measure_rdms(&state, n)?;
    rdms.check(n_elec, 1e-8)?;
    let e_rdm = t.energy(&rdms.d1, &rdms.d2);
    if (e_rdm - energy).abs() > RDM_ENERGY_TOL {
        return Err(RefineError::Invalid(format!(
            "energy from densities {e_rdm} differs from solver energy {energy}"
        )));
    }
    Ok(SolverOutput { energy, rdms, theta })
}
