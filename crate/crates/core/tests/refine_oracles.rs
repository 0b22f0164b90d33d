use mraqc::greenop;
use mraqc::mra::{FunctionTree, MraConfig};
use mraqc::refine::*;
use mraqc::scf::{self, ops, Molecule, SmoothedNuclearPotential};
use mraqc::secondq::compute_integrals;
use mraqc::wfn::SpinSummedRdms;

const EPS: f64 = 1e-4;

fn l2_diff(a: &FunctionTree, b: &FunctionTree) -> f64 {
    FunctionTree::add(a, b, 1.0, -1.0).unwrap().norm2()
}

/// Two orthonormalized, non-canonical Gaussians around a beryllium
/// nucleus: bound enough that both diagonal Fock elements are negative.
fn two_orbital_setup() -> (Vec<FunctionTree>, FunctionTree, greenop::SeparatedKernel) {
    let cfg = MraConfig::new(7, EPS, 20.0);
    let mol = Molecule::from_atoms(&[(4, [0.0; 3])]).unwrap();
    let vnuc = SmoothedNuclearPotential::new(&mol, &cfg).unwrap().tree().clone();
    let raw: Vec<FunctionTree> = [(3.0, [0.0; 3]), (0.3, [0.0, 0.0, 0.4])]
        .iter()
        .map(|&(a, c)| FunctionTree::project(ops::gaussian(a, c), &cfg, 3).unwrap())
        .collect();
    let orbs = scf::loewdin_orthonormalize(&raw).unwrap();
    let poisson = greenop::coulomb_operator(cfg.half_width, cfg.thresh).unwrap();
    (orbs, vnuc, poisson)
}

#[test]
fn closed_shell_update_reproduces_the_hartree_fock_update() {
    let (orbs, vnuc, poisson) = two_orbital_setup();
    let t = compute_integrals(&orbs, &vnuc, &poisson, 0.0).unwrap();
    let rdms = SpinSummedRdms::closed_shell(2, 2);
    let eps = multipliers(&t, &rdms).unwrap();
    let ours = orbital_update(&orbs, &rdms, &eps, &vnuc, &poisson, &[0, 1], 1e-3).unwrap();

    // canonical HF path: explicit Coulomb and exchange potentials
    let build = scf::fock_build(&orbs, &vnuc, &poisson, false).unwrap();
    let oracle = scf::bsh_update(&orbs, &build).unwrap();
    assert!((eps[(0, 1)] - 2.0 * build.fock[(0, 1)]).abs() < 10.0 * EPS);
    // no clamped decay constants: the comparison exercises the real κ_i
    assert!(build.fock[(0, 0)] < -0.1 && build.fock[(1, 1)] < -0.1, "{}", build.fock);
    assert!(build.fock[(0, 1)].abs() > 1e-2, "setup should be non-canonical");
    for (i, (a, b)) in ours.iter().zip(&oracle).enumerate() {
        let d = l2_diff(a, b);
        assert!(d <= 10.0 * EPS, "orbital {i}: ‖Δ‖ = {d:e}");
    }
}

#[test]
fn coupling_potentials_agree_with_integrals() {
    let (orbs, vnuc, poisson) = two_orbital_setup();
    let t = compute_integrals(&orbs, &vnuc, &poisson, 0.0).unwrap();
    let full = SpinSummedRdms {
        n: 2,
        d1: nalgebra::DMatrix::identity(2, 2),
        d2: vec![1.0; 16],
    };
    let pots = coupling_potentials(&orbs, &full, &poisson).unwrap();
    assert_eq!(pots.len(), 3);
    for k in 0..2 {
        for l in 0..2 {
            for m in 0..2 {
                for n in 0..2 {
                    let km = ops::product(&orbs[k], &orbs[m]);
                    let v = FunctionTree::inner(&km, &pots[&(l.min(n), l.max(n))]).unwrap();
                    assert!((v - t.g(k, l, m, n)).abs() < 10.0 * EPS, "({k}{l}|{m}{n}) {v} vs {}", t.g(k, l, m, n));
                }
            }
        }
    }
}

#[test]
fn hydrogen_ground_state_is_a_fixed_point() {
    let cfg = MraConfig::new(7, EPS, 50.0);
    let mol = Molecule::from_atoms(&[(1, [0.0; 3])]).unwrap();
    let vnuc = SmoothedNuclearPotential::new(&mol, &cfg).unwrap().tree().clone();
    let poisson = greenop::coulomb_operator(cfg.half_width, cfg.thresh).unwrap();
    let s1 = |x: &[f64]| (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()).exp() / std::f64::consts::PI.sqrt();
    let phi = FunctionTree::project_refined(s1, &cfg, 3, &[[0.0; 3]], 1e-3).unwrap();
    let rdms = SpinSummedRdms {
        n: 1,
        d1: nalgebra::DMatrix::from_element(1, 1, 1.0),
        d2: vec![0.0],
    };
    let eps = nalgebra::DMatrix::from_element(1, 1, -0.5);
    let out = orbital_update(std::slice::from_ref(&phi), &rdms, &eps, &vnuc, &poisson, &[0], 1e-3).unwrap();
    let d = l2_diff(&out[0], &phi);
    assert!(d <= 10.0 * EPS, "‖Δ‖ = {d:e}");
}

#[test]
fn low_occupation_orbitals_cannot_be_refined() {
    let (orbs, vnuc, poisson) = two_orbital_setup();
    let rdms = SpinSummedRdms::closed_shell(2, 1);
    let eps = nalgebra::DMatrix::zeros(2, 2);
    let err = orbital_update(&orbs, &rdms, &eps, &vnuc, &poisson, &[1], 1e-3).unwrap_err();
    assert!(matches!(err, RefineError::LowOccupation { orbital: 1, .. }));
}
