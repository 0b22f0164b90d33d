use mraqc::secondq::*;
use mraqc::wfn::*;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dense_sector_ground(enc: &EncodedHamiltonian, n_spatial: usize, n_elec: usize) -> f64 {
    // full 2^n qubit matrix, restricted to the sector by index selection
    let dim = 1usize << enc.n_qubits;
    let full = enc.poly.to_dense(enc.n_qubits);
    let basis = SectorBasis::new(n_spatial, n_elec).unwrap();
    let idx: Vec<usize> = basis.states().iter().map(|&s| s as usize).collect();
    let m = DMatrix::from_fn(idx.len(), idx.len(), |i, j| full[idx[i] * dim + idx[j]].re);
    lowest_eigenpair(&m).0
}

#[test]
fn determinant_fci_equals_dense_qubit_diagonalization() {
    for &(n, ne, seed) in &[(2usize, 2usize, 1u64), (4, 4, 2), (3, 2, 3)] {
        let t = IntegralTensors::random(n, seed);
        let e_det = fci(&t, ne).unwrap().energy;
        let enc = encode_hamiltonian(&t).unwrap();
        let e_dense = dense_sector_ground(&enc, n, ne);
        assert!((e_det - e_dense).abs() < 1e-9, "({ne},{}) {e_det} vs {e_dense}", 2 * n);
    }
}

#[test]
fn hf_determinant_energy_matches_slater_condon() {
    let t = IntegralTensors::random(3, 7);
    let enc = encode_hamiltonian(&t).unwrap();
    let psi = QubitState::basis(6, 0b1111).unwrap();
    let e = expectation(&enc.poly, &psi).unwrap();
    assert!((e - t.closed_shell_energy(2)).abs() < 1e-9);
}

#[test]
fn spa_gsd_is_exact_for_two_electrons_in_two_orbitals() {
    for seed in 0..4 {
        let t = IntegralTensors::random(2, 100 + seed);
        let enc = encode_hamiltonian(&t).unwrap();
        let c = build_spa_gsd(2, 2, AnsatzVariant::SpaGsd, None).unwrap();
        let r = vqe(&enc.poly, &c, &VqeOptions { restarts: 5, seed, ..Default::default() }).unwrap();
        let e_fci = fci(&t, 2).unwrap().energy;
        assert!((r.energy - e_fci).abs() < 1e-6, "{} vs {e_fci}", r.energy);
    }
}

#[test]
fn shift_rules_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for &(n, ne) in &[(2usize, 2usize), (3, 2), (4, 4)] {
        let t = IntegralTensors::random(n, 40 + n as u64);
        let enc = encode_hamiltonian(&t).unwrap();
        let c = build_spa_gsd(n, ne, AnsatzVariant::SpaGsd, None).unwrap();
        let theta: Vec<f64> = (0..c.n_params).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let a = gradient(&enc.poly, &c, &theta).unwrap();
        let b = finite_difference_gradient(&enc.poly, &c, &theta, 1e-5).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-6, "{x} vs {y}");
        }
    }
}

#[test]
fn rdm_energy_equals_expectation() {
    let t = IntegralTensors::random(3, 5);
    let enc = encode_hamiltonian(&t).unwrap();
    let c = build_spa_gsd(3, 2, AnsatzVariant::SpaGsd, None).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10 {
        let theta: Vec<f64> = (0..c.n_params).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let psi = c.prepare(&theta).unwrap();
        let r = measure_rdms(&psi, 3).unwrap();
        let e1 = t.energy(&r.d1, &r.d2);
        let e2 = expectation(&enc.poly, &psi).unwrap();
        assert!((e1 - e2).abs() < 1e-9);
        assert!(r.diagnostics(2).max() < 1e-8);
    }
}
