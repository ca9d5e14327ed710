use ndarray::{Array2, Array4};

use crate::error::{Error, Result};
use crate::hamiltonian::SpinChainSpec;

use super::mps::MatrixProductState;

/// Largest chain for which [`MpoOperator::to_dense`] is allowed.
pub const DENSE_MPO_CAP: usize = 12;

type Op = [[f64; 2]; 2];

const ID: Op = [[1.0, 0.0], [0.0, 1.0]];
const SX: Op = [[0.0, 1.0], [1.0, 0.0]];
/// `-i * sigma_y`, real; `sigma_y (x) sigma_y = -(ry (x) ry)`.
const RY: Op = [[0.0, -1.0], [1.0, 0.0]];
const SZ: Op = [[1.0, 0.0], [0.0, -1.0]];

/// Nonzero MPO entry `W[left, out, in, right]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Entry {
    pub left: usize,
    pub out: usize,
    pub inp: usize,
    pub right: usize,
    pub value: f64,
}

/// Site operators `W[left, out, in, right]`, boundary bonds of size 1.
#[derive(Debug, Clone, PartialEq)]
pub struct MpoOperator {
    sites: Vec<Array4<f64>>,
    entries: Vec<Vec<Entry>>,
}

/// Lower-triangular encoding: channel 0 carries the finished sum, the last
/// channel the not-yet-started identity string, and one channel per
/// nonzero coupling carries an open bond.
pub fn build_mpo(spec: &SpinChainSpec) -> Result<MpoOperator> {
    spec.validate()?;
    let [jx, jy, jz, hx, hz] = spec.couplings();
    let couplings: Vec<(Op, f64)> =
        [(SX, jx / 4.0), (RY, -jy / 4.0), (SZ, jz / 4.0)].into_iter().filter(|(_, j)| *j != 0.0).collect();
    let d = couplings.len() + 2;
    let last = d - 1;
    let mut bulk = Array4::<f64>::zeros((d, 2, 2, d));
    let mut put = |a: usize, b: usize, op: &Op, scale: f64| {
        for o in 0..2 {
            for i in 0..2 {
                bulk[[a, o, i, b]] += scale * op[o][i];
            }
        }
    };
    put(0, 0, &ID, 1.0);
    put(last, last, &ID, 1.0);
    put(last, 0, &SX, -hx / 2.0);
    put(last, 0, &SZ, -hz / 2.0);
    for (k, (op, j)) in couplings.iter().enumerate() {
        put(k + 1, 0, op, 1.0);
        put(last, k + 1, op, *j);
    }
    let l = spec.l;
    let sites: Vec<Array4<f64>> = (0..l)
        .map(|i| {
            let rows = if i == 0 { last..last + 1 } else { 0..d };
            let cols = if i == l - 1 { 0..1 } else { 0..d };
            bulk.slice(ndarray::s![rows, .., .., cols]).to_owned()
        })
        .collect();
    Ok(MpoOperator::from_sites(sites))
}

impl MpoOperator {
    pub(crate) fn from_sites(sites: Vec<Array4<f64>>) -> Self {
        let entries = sites
            .iter()
            .map(|w| {
                w.indexed_iter()
                    .filter(|(_, v)| **v != 0.0)
                    .map(|((left, out, inp, right), &value)| Entry { left, out, inp, right, value })
                    .collect()
            })
            .collect();
        Self { sites, entries }
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn site(&self, i: usize) -> &Array4<f64> {
        &self.sites[i]
    }

    pub(crate) fn entries(&self, i: usize) -> &[Entry] {
        &self.entries[i]
    }

    /// Largest internal bond.
    pub fn bond_dim(&self) -> usize {
        self.sites.iter().map(|w| w.shape()[3]).max().unwrap_or(1)
    }

    pub(crate) fn left_dim(&self, i: usize) -> usize {
        self.sites[i].shape()[0]
    }

    pub(crate) fn right_dim(&self, i: usize) -> usize {
        self.sites[i].shape()[3]
    }

    /// Dense matrix, site 0 most significant.
    pub fn to_dense(&self) -> Result<Array2<f64>> {
        let l = self.len();
        if l > DENSE_MPO_CAP {
            return Err(Error::SizeOverCap { what: "dense MPO sites", got: l, cap: DENSE_MPO_CAP });
        }
        let mut blocks: Vec<Array2<f64>> = vec![Array2::ones((1, 1))];
        for w in &self.sites {
            let (da, _, _, db) = w.dim();
            let dim = blocks[0].nrows();
            let mut next = vec![Array2::<f64>::zeros((2 * dim, 2 * dim)); db];
            for a in 0..da {
                for b in 0..db {
                    for o in 0..2 {
                        for i in 0..2 {
                            let v = w[[a, o, i, b]];
                            if v == 0.0 {
                                continue;
                            }
                            let blk = &blocks[a];
                            for r in 0..dim {
                                for c in 0..dim {
                                    next[b][[2 * r + o, 2 * c + i]] += v * blk[[r, c]];
                                }
                            }
                        }
                    }
                }
            }
            blocks = next;
        }
        Ok(blocks.swap_remove(0))
    }

    /// `<psi|H|psi> / <psi|psi>` by environment contraction; no canonical
    /// form is assumed.
    pub fn expectation(&self, psi: &MatrixProductState) -> Result<f64> {
        if psi.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), got: psi.len() });
        }
        let mut env = vec![Array2::<f64>::ones((1, 1))];
        for (i, a) in psi.tensors().iter().enumerate() {
            env = super::env::extend_left(&env, a, self.entries(i), self.right_dim(i));
        }
        let norm = psi.norm_sqr();
        if !(norm > 0.0) {
            return Err(Error::invalid("expectation of a zero MPS"));
        }
        Ok(env[0][[0, 0]] / norm)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dmrg::mps::{init_mps, InitKind};
    use crate::hamiltonian::build_spin_chain;

    fn dense_max_diff(spec: &SpinChainSpec) -> f64 {
        let a = build_mpo(spec).unwrap().to_dense().unwrap();
        let b = build_spin_chain(spec).unwrap().to_dense();
        a.iter().zip(b.iter()).map(|(x, y)| (x - y.re).abs() + y.im.abs()).fold(0.0, f64::max)
    }

    #[test]
    fn dense_matches_pauli_construction() {
        assert!(dense_max_diff(&SpinChainSpec::heisenberg_xxx(2)) < 1e-12);
        assert!(dense_max_diff(&SpinChainSpec::new(5, [0.3, -1.1, 0.7, 0.4, -0.2])) < 1e-12);
        assert!(dense_max_diff(&SpinChainSpec::critical_tfim(4)) < 1e-12);
    }

    #[test]
    fn bond_dimensions() {
        assert_eq!(build_mpo(&SpinChainSpec::critical_tfim(6)).unwrap().bond_dim(), 3);
        assert_eq!(build_mpo(&SpinChainSpec::heisenberg_xxx(6)).unwrap().bond_dim(), 5);
        assert_eq!(build_mpo(&SpinChainSpec::critical_xx(6)).unwrap().bond_dim(), 4);
    }

    #[test]
    fn expectation_matches_dense() {
        let spec = SpinChainSpec::gapless_xxz(8);
        let mpo = build_mpo(&spec).unwrap();
        let psi = init_mps(InitKind::Random { seed: 4 }, 8, 6).unwrap();
        let v = psi.to_dense().unwrap();
        let h = mpo.to_dense().unwrap();
        let hv = h.dot(&ndarray::Array1::from(v.clone()));
        let dense = v.iter().zip(hv.iter()).map(|(a, b)| a * b).sum::<f64>();
        assert!((mpo.expectation(&psi).unwrap() - dense).abs() < 1e-12);
    }
}
