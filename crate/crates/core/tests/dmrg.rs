mod common;

use gsbench::budget::Budget;
use gsbench::dmrg::{
    build_mpo, init_mps, mi_error, mutual_information, run_dmrg, DmrgMethod, DmrgProtocol, DmrgStage, InitKind,
    MatrixProductState,
};
use gsbench::{SpinChainSpec, C64};
use proptest::prelude::*;

fn two_site(bonds: &[usize], sweeps: usize) -> DmrgProtocol {
    DmrgProtocol {
        stages: vec![DmrgStage {
            method: DmrgMethod::Dmrg2,
            bond_schedule: bonds.to_vec(),
            cutoff: 1e-12,
            eig_tol: 1e-10,
            max_sweeps: sweeps,
            ncv: 6,
            init: InitKind::Neel,
            init_bond: 1,
        }],
    }
}

fn complexify(psi: &[f64]) -> Vec<C64> {
    psi.iter().map(|&a| C64::new(a, 0.0)).collect()
}

#[test]
fn two_site_matches_sector_diagonalization() {
    let spec = SpinChainSpec::heisenberg_xxx(10);
    let out = run_dmrg(&spec, &two_site(&[16, 32, 64], 8), Budget::quanta(1 << 40)).unwrap();
    let oracle = common::xxz_sector_lowest(10, 1.0, 1.0);
    assert!((out.energy - oracle).abs() < 1e-9, "{} vs {oracle}", out.energy);
    assert!(!out.budget_exhausted);
}

#[test]
fn one_site_reaches_xx_ground_state() {
    let spec = SpinChainSpec::critical_xx(8);
    let mut p = two_site(&[4, 8, 16], 3);
    p.stages.push(DmrgStage { method: DmrgMethod::Dmrg1, init: InitKind::Inherit, max_sweeps: 6, ..p.stages[0].clone() });
    let out = run_dmrg(&spec, &p, Budget::quanta(1 << 40)).unwrap();
    let oracle = common::dense_lowest(&common::dense_chain(&spec));
    assert!((out.energy - oracle).abs() < 1e-9);
}

#[test]
fn mpo_matches_spin_matrices() {
    let spec = SpinChainSpec::new(5, [0.9, -0.4, 1.3, 0.2, -0.7]);
    let mpo = build_mpo(&spec).unwrap().to_dense().unwrap();
    let oracle = common::dense_chain(&spec);
    for ((i, j), v) in mpo.indexed_iter() {
        assert!((v - oracle[[i, j]].re).abs() < 1e-12 && oracle[[i, j]].im.abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn mpo_expectation_is_dense_quadratic_form(seed in 0u64..10_000, l in 2usize..7, bond in 1usize..5) {
        let spec = SpinChainSpec::new(l, [1.0, 0.6, -0.8, 0.3, 0.5]);
        let mut psi = init_mps(InitKind::Random { seed }, l, bond).unwrap();
        psi.normalize();
        let v = psi.to_dense().unwrap();
        let h = common::dense_chain(&spec);
        let hv = h.dot(&ndarray::Array1::from(complexify(&v)));
        let dense: f64 = v.iter().zip(hv.iter()).map(|(a, b)| a * b.re).sum();
        let mpo = build_mpo(&spec).unwrap();
        prop_assert!((mpo.expectation(&psi).unwrap() - dense).abs() < 1e-10);
    }

    #[test]
    fn product_states_have_no_mutual_information(angles in proptest::collection::vec(0.0..std::f64::consts::PI, 2..7)) {
        let l = angles.len();
        let mut psi = vec![1.0];
        for a in &angles {
            psi = psi.iter().flat_map(|x| [x * a.cos(), x * a.sin()]).collect();
        }
        let mps = MatrixProductState::from_dense(&psi, l).unwrap();
        let mi = mutual_information(&mps).unwrap();
        for i in 0..l {
            for j in 0..l {
                if i != j {
                    prop_assert!(mi[[i, j]].abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn canonicalization_keeps_state(seed in 0u64..10_000, center in 0usize..6) {
        let mut psi = init_mps(InitKind::Random { seed }, 6, 4).unwrap();
        psi.normalize();
        let before = psi.to_dense().unwrap();
        psi.canonicalize(center).unwrap();
        let after = psi.to_dense().unwrap();
        prop_assert_eq!(psi.canonical_center(), Some(center));
        prop_assert!(psi.isometry_error() < 1e-10);
        let diff = before.iter().zip(&after).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(diff < 1e-12);
    }
}

#[test]
fn bell_pair_mutual_information() {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mps = MatrixProductState::from_dense(&[h, 0.0, 0.0, h], 2).unwrap();
    let mi = mutual_information(&mps).unwrap();
    assert!((mi[[0, 1]] - 2.0 * std::f64::consts::LN_2).abs() < 1e-10);
    assert!(mi[[0, 0]].is_nan());
}

#[test]
fn ground_state_mutual_information_matches_dense_oracle() {
    let spec = SpinChainSpec::heisenberg_xxx(8);
    let out = run_dmrg(&spec, &two_site(&[16, 32], 6), Budget::quanta(1 << 40)).unwrap();
    let psi = out.state.to_dense().unwrap();
    let oracle = common::dense_mutual_information(&complexify(&psi), 8);
    let err = mi_error(&mutual_information(&out.state).unwrap(), &oracle).unwrap();
    let worst = err.iter().filter(|x| !x.is_nan()).fold(0.0, |a: f64, &b| a.max(b));
    assert!(worst < 1e-8, "max MI error {worst}");
}

#[test]
fn quanta_budget_stops_at_sweep_boundary() {
    let spec = SpinChainSpec::heisenberg_xxx(12);
    let full = run_dmrg(&spec, &two_site(&[8, 16], 10), Budget::quanta(1 << 40)).unwrap();
    let cut = run_dmrg(&spec, &two_site(&[8, 16], 10), Budget::quanta(50)).unwrap();
    assert!(cut.budget_exhausted);
    assert!(cut.completed_sweeps < full.completed_sweeps);
    assert!(cut.energy >= full.energy - 1e-12);
    // same quanta, same answer
    let again = run_dmrg(&spec, &two_site(&[8, 16], 10), Budget::quanta(50)).unwrap();
    assert_eq!(again.energy, cut.energy);
}

#[test]
fn zero_budget_is_rejected() {
    let spec = SpinChainSpec::heisenberg_xxx(4);
    assert!(matches!(run_dmrg(&spec, &two_site(&[4], 2), Budget::quanta(0)), Err(gsbench::Error::BudgetZero)));
}
