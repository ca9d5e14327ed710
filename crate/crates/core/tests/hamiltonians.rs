mod common;

use gsbench::hamiltonian::{
    build_spin_chain, exact_ground, free_fermion_ground_energy, parse_hamiltonian_file, write_hamiltonian_file,
};
use gsbench::{SpinChainSpec, C64};
use proptest::prelude::*;

fn coupling() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.0), -2.0..2.0f64]
}

fn chain(max_l: usize) -> impl Strategy<Value = SpinChainSpec> {
    (2..=max_l, [coupling(), coupling(), coupling(), coupling(), coupling()]).prop_map(|(l, c)| SpinChainSpec::new(l, c))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn pauli_build_matches_spin_matrices(spec in chain(5)) {
        let h = build_spin_chain(&spec).unwrap().to_dense();
        let oracle = common::dense_chain(&spec);
        let diff = (&h - &oracle).iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(diff < 1e-12, "max entry difference {diff}");
    }

    #[test]
    fn exact_ground_matches_jacobi(spec in chain(4)) {
        let h = build_spin_chain(&spec).unwrap();
        let (e, psi) = exact_ground(&h).unwrap();
        prop_assert!((e - common::dense_lowest(&common::dense_chain(&spec))).abs() < 1e-9);
        prop_assert!((h.quadratic_form(&psi).unwrap() - e).abs() < 1e-9);
    }

    #[test]
    fn quadratic_form_is_dense_rayleigh_quotient(spec in chain(4), seed in 0u64..1000) {
        let h = build_spin_chain(&spec).unwrap();
        let dense = common::dense_chain(&spec);
        let dim = 1usize << spec.l;
        let v: Vec<C64> = (0..dim).map(|i| C64::new(((i as u64 * 7 + seed) % 13) as f64 - 6.0, ((i as u64 + seed) % 5) as f64)).collect();
        let hv = dense.dot(&ndarray::Array1::from(v.clone()));
        let q_dense: f64 = v.iter().zip(hv.iter()).map(|(a, b)| (a.conj() * b).re).sum();
        let q = h.quadratic_form(&v).unwrap();
        prop_assert!((q - q_dense).abs() < 1e-9 * (1.0 + q.abs()));
    }

    #[test]
    fn file_format_round_trips(spec in chain(5)) {
        prop_assume!(spec.couplings().iter().any(|&c| c != 0.0));
        let h = build_spin_chain(&spec).unwrap();
        let back = parse_hamiltonian_file(&write_hamiltonian_file(&h)).unwrap();
        prop_assert_eq!(back, h);
    }
}

#[test]
fn sector_oracle_agrees_with_exact_ground() {
    for (l, jz) in [(8, 1.0), (10, 1.0), (8, 0.5)] {
        let spec = SpinChainSpec::new(l, [1.0, 1.0, jz, 0.0, 0.0]);
        let (e, _) = exact_ground(&build_spin_chain(&spec).unwrap()).unwrap();
        let oracle = common::xxz_sector_lowest(l, 1.0, jz);
        assert!((e - oracle).abs() < 1e-9, "L={l} jz={jz}: {e} vs {oracle}");
    }
}

#[test]
fn free_fermion_matches_exact_diagonalization() {
    for l in [4, 7, 10] {
        for spec in [SpinChainSpec::critical_xx(l), SpinChainSpec::critical_tfim(l), SpinChainSpec::new(l, [0.0, 0.0, -0.7, 1.3, 0.0]), SpinChainSpec::new(l, [-0.6, -0.6, 0.0, 0.0, 0.0])] {
            let (e, _) = exact_ground(&build_spin_chain(&spec).unwrap()).unwrap();
            let ff = free_fermion_ground_energy(&spec).unwrap();
            assert!((e - ff).abs() < 1e-9, "{spec:?}: {e} vs {ff}");
        }
    }
}

#[test]
fn free_fermion_rejects_interacting_chain() {
    assert!(free_fermion_ground_energy(&SpinChainSpec::heisenberg_xxx(6)).is_err());
}

#[test]
fn test_side_free_fermion_oracles_match_dense() {
    for l in [2, 3, 5, 6] {
        let xx = SpinChainSpec::new(l, [0.8, 0.8, 0.0, 0.0, 0.0]);
        let dense = common::dense_lowest(&common::dense_chain(&xx));
        assert!((common::xx_free_fermion(l, 0.8) - dense).abs() < 1e-10);
        let tfim = SpinChainSpec::new(l, [0.0, 0.0, 1.0, 0.7, 0.0]);
        let dense = common::dense_lowest(&common::dense_chain(&tfim));
        assert!((common::tfim_free_fermion(l, 1.0, 0.7) - dense).abs() < 1e-10, "L={l}");
    }
}
