//! Data-parallel kernels. Run once with the default features and once with
//! `--no-default-features`; the group name records which path was built,
//! so criterion keeps the two baselines apart.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use gsbench::budget::Budget;
use gsbench::dmrg::{mutual_information, run_dmrg, DmrgMethod, DmrgProtocol, DmrgStage, InitKind};
use gsbench::hamiltonian::build_spin_chain;
use gsbench::parallel::is_parallel;
use gsbench::presets::{projector_baseline, vqe_pool_baseline};
use gsbench::projector::{factorize, run_projector, ProjectorConfig};
use gsbench::vqe::gradient_variance;
use gsbench::SpinChainSpec;

fn path() -> &'static str {
    if is_parallel() {
        "parallel"
    } else {
        "sequential"
    }
}

fn projector(c: &mut Criterion) {
    let mut group = c.benchmark_group(format!("projector/{}", path()));
    group.sample_size(10);
    for l in [2usize, 4, 6] {
        let h = build_spin_chain(&SpinChainSpec::heisenberg_xxx(l)).unwrap().to_dense();
        let fact = factorize(&h, 1e-5).unwrap();
        let cfg = ProjectorConfig { num_blocks: 4, ..projector_baseline(0) };
        group.bench_with_input(BenchmarkId::new("blocks", l), &fact, |b, f| {
            b.iter(|| run_projector(black_box(f), &cfg, Budget::quanta(u64::MAX)).unwrap())
        });
    }
    group.finish();
}

fn gradients(c: &mut Criterion) {
    let mut group = c.benchmark_group(format!("gradient_variance/{}", path()));
    group.sample_size(10);
    for l in [6usize, 8, 10] {
        let h = build_spin_chain(&SpinChainSpec::heisenberg_xxx(l)).unwrap();
        let ansatz = vqe_pool_baseline(l, 2, 0).ansatz;
        group.bench_with_input(BenchmarkId::new("samples64", l), &l, |b, _| {
            b.iter(|| gradient_variance(black_box(&h), &ansatz, 64, 1).unwrap())
        });
    }
    group.finish();
}

fn mutual_info(c: &mut Criterion) {
    let mut group = c.benchmark_group(format!("mutual_information/{}", path()));
    group.sample_size(10);
    for l in [16usize, 32] {
        let protocol = DmrgProtocol {
            stages: vec![DmrgStage {
                method: DmrgMethod::Dmrg2,
                bond_schedule: vec![8, 16, 32],
                cutoff: 1e-10,
                eig_tol: 1e-8,
                max_sweeps: 4,
                ncv: 4,
                init: InitKind::Neel,
                init_bond: 1,
            }],
        };
        let state = run_dmrg(&SpinChainSpec::heisenberg_xxx(l), &protocol, Budget::quanta(u64::MAX)).unwrap().state;
        group.bench_with_input(BenchmarkId::new("pairs", l), &state, |b, s| b.iter(|| mutual_information(black_box(s)).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, projector, gradients, mutual_info);
criterion_main!(benches);
