use criterion::{criterion_group, criterion_main, Criterion};
use mraqc::greenop;
use mraqc::mra::FunctionTree;
use mraqc::secondq::{encode_hamiltonian, IntegralTensors};
use mraqc::wfn::{build_spa_gsd, energy, fci, gradient, AnsatzVariant, SectorOperator};
use mraqc_bench::gaussian_tree;
use std::hint::black_box;

fn mra(c: &mut Criterion) {
    let f = gaussian_tree(1.0, 1e-4);
    let g = gaussian_tree(0.5, 1e-4);
    let mut group = c.benchmark_group("mra");
    group.sample_size(10);
    group.bench_function("project_gaussian", |b| b.iter(|| gaussian_tree(black_box(1.0), 1e-4)));
    group.bench_function("multiply", |b| b.iter(|| FunctionTree::multiply(&f, &g).unwrap()));
    group.bench_function("inner", |b| b.iter(|| FunctionTree::inner(&f, &g).unwrap()));
    let poisson = greenop::coulomb_operator(f.half_width(), f.thresh()).unwrap();
    group.bench_function("poisson_apply", |b| b.iter(|| greenop::apply(&poisson, &f).unwrap()));
    group.finish();
}

fn wfn(c: &mut Criterion) {
    let mut group = c.benchmark_group("wfn");
    let t4 = IntegralTensors::random(4, 1);
    group.bench_function("fci_4_8", |b| b.iter(|| fci(black_box(&t4), 4).unwrap()));
    let t = IntegralTensors::random(4, 2);
    let poly = encode_hamiltonian(&t).unwrap().poly;
    let op = SectorOperator::from_pauli(&poly, 4, 2).unwrap();
    let circuit = build_spa_gsd(4, 2, AnsatzVariant::SpaGsd, None).unwrap();
    let theta = vec![0.05; circuit.n_params];
    group.bench_function("spa_gsd_energy_2_8", |b| b.iter(|| energy(&op, &circuit, black_box(&theta)).unwrap()));
    group.bench_function("spa_gsd_gradient_2_8", |b| b.iter(|| gradient(&op, &circuit, black_box(&theta)).unwrap()));
    group.finish();
}

criterion_group!(benches, mra, wfn);
criterion_main!(benches);
