use ndarray::{s, Array2, Array3, ArrayView2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::qr;

/// Largest chain for which dense expansion is allowed.
pub const DENSE_MPS_CAP: usize = 24;

/// Starting state of a stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    /// Continue from the previous stage's state.
    Inherit,
    Random { seed: u64 },
    /// `|0101...>` with site 0 in `|0>`.
    Neel,
    Plus,
    Minus,
    ProductUp,
    ProductDown,
}

/// Open-boundary MPS with real site tensors of shape `(left, 2, right)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixProductState {
    tensors: Vec<Array3<f64>>,
    center: Option<usize>,
}

/// Largest useful bond between sites `b` and `b + 1` of an `l`-site chain.
pub(crate) fn bond_cap(l: usize, b: usize) -> usize {
    let left = b + 1;
    let right = l - 1 - b;
    let exp = left.min(right).min(40) as u32;
    1usize << exp
}

pub fn init_mps(kind: InitKind, l: usize, bond: usize) -> Result<MatrixProductState> {
    if l == 0 {
        return Err(Error::invalid("chain must have at least one site"));
    }
    if bond == 0 {
        return Err(Error::invalid("init bond must be >= 1"));
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let product = |amp: &dyn Fn(usize) -> [f64; 2]| -> Vec<Array3<f64>> {
        (0..l)
            .map(|i| {
                let a = amp(i);
                Array3::from_shape_vec((1, 2, 1), a.to_vec()).unwrap()
            })
            .collect()
    };
    let tensors = match kind {
        InitKind::Inherit => return Err(Error::invalid("inherit is not a concrete initial state")),
        InitKind::Neel => product(&|i| if i % 2 == 0 { [1.0, 0.0] } else { [0.0, 1.0] }),
        InitKind::Plus => product(&|_| [h, h]),
        InitKind::Minus => product(&|_| [h, -h]),
        InitKind::ProductUp => product(&|_| [1.0, 0.0]),
        InitKind::ProductDown => product(&|_| [0.0, 1.0]),
        InitKind::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let dims: Vec<usize> = (0..=l)
                .map(|b| if b == 0 || b == l { 1 } else { bond.min(bond_cap(l, b - 1)) })
                .collect();
            let tensors = (0..l)
                .map(|i| Array3::from_shape_simple_fn((dims[i], 2, dims[i + 1]), || StandardNormal.sample(&mut rng)))
                .collect();
            let mut mps = MatrixProductState { tensors, center: None };
            mps.canonicalize(0)?;
            mps.normalize();
            return Ok(mps);
        }
    };
    let mut mps = MatrixProductState { tensors, center: None };
    if bond > 1 {
        mps.pad_bonds(bond);
    }
    mps.canonicalize(0)?;
    Ok(mps)
}

impl MatrixProductState {
    pub fn from_tensors(tensors: Vec<Array3<f64>>) -> Result<Self> {
        if tensors.is_empty() {
            return Err(Error::invalid("MPS needs at least one site"));
        }
        for (i, t) in tensors.iter().enumerate() {
            if t.shape()[1] != 2 {
                return Err(Error::invalid(format!("site {i} has physical dimension {}", t.shape()[1])));
            }
        }
        if tensors[0].shape()[0] != 1 || tensors.last().unwrap().shape()[2] != 1 {
            return Err(Error::invalid("boundary bonds must be 1"));
        }
        for (i, w) in tensors.windows(2).enumerate() {
            if w[0].shape()[2] != w[1].shape()[0] {
                return Err(Error::DimensionMismatch { expected: w[0].shape()[2], got: w[1].shape()[0] })
                    .map_err(|e| Error::invalid(format!("bond {i}: {e}")));
            }
        }
        Ok(Self { tensors, center: None })
    }

    /// Exact MPS of a dense real state by successive SVDs (no truncation).
    pub fn from_dense(psi: &[f64], l: usize) -> Result<Self> {
        if l == 0 || l > DENSE_MPS_CAP {
            return Err(Error::SizeOverCap { what: "dense MPS sites", got: l, cap: DENSE_MPS_CAP });
        }
        if psi.len() != 1 << l {
            return Err(Error::DimensionMismatch { expected: 1 << l, got: psi.len() });
        }
        let mut tensors = Vec::with_capacity(l);
        let mut rest = Array2::from_shape_vec((1, psi.len()), psi.to_vec()).unwrap();
        for _ in 0..l - 1 {
            let left = rest.nrows();
            let cols = rest.ncols() / 2;
            let m = rest.into_shape_with_order((left * 2, cols)).unwrap();
            let (q, r) = qr(&m);
            let k = q.ncols();
            tensors.push(q.into_shape_with_order((left, 2, k)).unwrap());
            rest = r;
        }
        let left = rest.nrows();
        tensors.push(rest.into_shape_with_order((left, 2, 1)).unwrap());
        Ok(Self { tensors, center: Some(l - 1) })
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn tensors(&self) -> &[Array3<f64>] {
        &self.tensors
    }

    pub(crate) fn tensors_mut(&mut self) -> &mut Vec<Array3<f64>> {
        &mut self.tensors
    }

    pub fn canonical_center(&self) -> Option<usize> {
        self.center
    }

    pub(crate) fn set_center(&mut self, c: Option<usize>) {
        self.center = c;
    }

    /// Internal bond dimensions, `len() - 1` entries.
    pub fn bond_dims(&self) -> Vec<usize> {
        self.tensors[..self.len() - 1].iter().map(|t| t.shape()[2]).collect()
    }

    pub fn max_bond(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    /// Dense amplitudes, site 0 most significant.
    pub fn to_dense(&self) -> Result<Vec<f64>> {
        if self.len() > DENSE_MPS_CAP {
            return Err(Error::SizeOverCap { what: "dense MPS sites", got: self.len(), cap: DENSE_MPS_CAP });
        }
        let mut acc = Array2::<f64>::ones((1, 1));
        for t in &self.tensors {
            let (l, _, r) = t.dim();
            let mat = t.view().into_shape_with_order((l, 2 * r)).unwrap();
            let next = acc.dot(&mat);
            let rows = next.nrows() * 2;
            acc = next.into_shape_with_order((rows, r)).unwrap();
        }
        Ok(acc.into_iter().collect())
    }

    /// `<psi|psi>` by transfer-matrix contraction.
    pub fn norm_sqr(&self) -> f64 {
        let mut env = Array2::<f64>::ones((1, 1));
        for t in &self.tensors {
            let mut next = Array2::<f64>::zeros((t.shape()[2], t.shape()[2]));
            for p in 0..2 {
                let a = t.index_axis(Axis(1), p);
                next = next + a.t().dot(&env.dot(&a));
            }
            env = next;
        }
        env[[0, 0]]
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().max(0.0).sqrt()
    }

    /// Rescales so the norm is one. With a canonical center only that
    /// tensor changes.
    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            let site = self.center.unwrap_or(0);
            self.tensors[site].mapv_inplace(|x| x / n);
        }
    }

    /// Left-orthonormalizes sites `< c` and right-orthonormalizes sites
    /// `> c`. Rank-deficient bonds keep their size; QR completes them with
    /// orthonormal extra states.
    pub fn canonicalize(&mut self, c: usize) -> Result<()> {
        if c >= self.len() {
            return Err(Error::invalid(format!("center {c} outside chain of {}", self.len())));
        }
        for i in 0..c {
            self.shift_right(i)?;
        }
        for i in (c + 1..self.len()).rev() {
            self.shift_left(i)?;
        }
        self.center = Some(c);
        Ok(())
    }

    /// QR at site `i`, pushing the remainder into site `i + 1`.
    pub(crate) fn shift_right(&mut self, i: usize) -> Result<()> {
        let (l, _, r) = self.tensors[i].dim();
        let m = self.tensors[i].view().into_shape_with_order((2 * l, r)).unwrap();
        let (q, rr) = qr(&m.to_owned());
        let k = q.ncols();
        self.tensors[i] = q.into_shape_with_order((l, 2, k)).unwrap();
        let next = &self.tensors[i + 1];
        let (_, _, r2) = next.dim();
        let nm = next.view().into_shape_with_order((r, 2 * r2)).unwrap();
        self.tensors[i + 1] = rr.dot(&nm).into_shape_with_order((k, 2, r2)).unwrap();
        if self.center == Some(i) {
            self.center = Some(i + 1);
        }
        Ok(())
    }

    /// LQ at site `i`, pushing the remainder into site `i - 1`.
    pub(crate) fn shift_left(&mut self, i: usize) -> Result<()> {
        let (l, _, r) = self.tensors[i].dim();
        let m = self.tensors[i].view().into_shape_with_order((l, 2 * r)).unwrap();
        let (q, rr) = qr(&m.t().to_owned());
        let k = q.ncols();
        self.tensors[i] = q.t().as_standard_layout().into_owned().into_shape_with_order((k, 2, r)).unwrap();
        let prev = &self.tensors[i - 1];
        let (l0, _, _) = prev.dim();
        let pm = prev.view().into_shape_with_order((2 * l0, l)).unwrap();
        self.tensors[i - 1] = pm.dot(&rr.t()).into_shape_with_order((l0, 2, k)).unwrap();
        if self.center == Some(i) {
            self.center = Some(i - 1);
        }
        Ok(())
    }

    /// Zero-pads every internal bond up to `target` (capped by the exact
    /// Schmidt rank bound). The represented state is unchanged but
    /// canonical form is lost.
    pub(crate) fn pad_bonds(&mut self, target: usize) {
        let l = self.len();
        for b in 0..l.saturating_sub(1) {
            let cur = self.tensors[b].shape()[2];
            let want = target.min(bond_cap(l, b)).max(cur);
            if want == cur {
                continue;
            }
            let (l0, _, _) = self.tensors[b].dim();
            let mut left = Array3::<f64>::zeros((l0, 2, want));
            left.slice_mut(s![.., .., ..cur]).assign(&self.tensors[b]);
            self.tensors[b] = left;
            let (_, _, r1) = self.tensors[b + 1].dim();
            let mut right = Array3::<f64>::zeros((want, 2, r1));
            right.slice_mut(s![..cur, .., ..]).assign(&self.tensors[b + 1]);
            self.tensors[b + 1] = right;
        }
        self.center = None;
    }

    /// Largest deviation from the isometry conditions implied by the
    /// canonical center; zero when there is no center.
    pub fn isometry_error(&self) -> f64 {
        let Some(c) = self.center else { return 0.0 };
        let mut worst: f64 = 0.0;
        for (i, t) in self.tensors.iter().enumerate() {
            let (l, _, r) = t.dim();
            let gram = if i < c {
                let m = t.view().into_shape_with_order((2 * l, r)).unwrap();
                m.t().dot(&m)
            } else if i > c {
                let m = t.view().into_shape_with_order((l, 2 * r)).unwrap();
                m.dot(&m.t())
            } else {
                continue;
            };
            worst = worst.max(identity_deviation(gram.view()));
        }
        worst
    }

    /// Mirror image: site `i` becomes site `len - 1 - i`.
    pub fn reversed(&self) -> Self {
        let l = self.len();
        let tensors = self
            .tensors
            .iter()
            .rev()
            .map(|t| t.view().permuted_axes([2, 1, 0]).as_standard_layout().into_owned())
            .collect();
        Self { tensors, center: self.center.map(|c| l - 1 - c) }
    }
}

fn identity_deviation(m: ArrayView2<f64>) -> f64 {
    let mut worst: f64 = 0.0;
    for ((i, j), v) in m.indexed_iter() {
        let target = if i == j { 1.0 } else { 0.0 };
        worst = worst.max((v - target).abs());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis(l: usize, idx: usize) -> Vec<f64> {
        let mut v = vec![0.0; 1 << l];
        v[idx] = 1.0;
        v
    }

    #[test]
    fn neel_is_0101() {
        let m = init_mps(InitKind::Neel, 4, 1).unwrap();
        assert_eq!(m.to_dense().unwrap(), basis(4, 0b0101));
    }

    #[test]
    fn padded_neel_keeps_state_and_isometries() {
        let m = init_mps(InitKind::Neel, 6, 8).unwrap();
        assert_eq!(m.bond_dims(), vec![2, 4, 8, 4, 2]);
        let d = m.to_dense().unwrap();
        for (i, x) in d.iter().enumerate() {
            let want = if i == 0b010101 { 1.0 } else { 0.0 };
            assert!((x.abs() - want).abs() < 1e-12);
        }
        assert!(m.isometry_error() < 1e-12);
    }

    #[test]
    fn plus_minus_and_products() {
        let p = init_mps(InitKind::Plus, 2, 1).unwrap().to_dense().unwrap();
        assert!(p.iter().all(|x| (x - 0.5).abs() < 1e-15));
        let m = init_mps(InitKind::Minus, 2, 1).unwrap().to_dense().unwrap();
        assert!((m[1] + 0.5).abs() < 1e-15 && (m[3] - 0.5).abs() < 1e-15);
        assert_eq!(init_mps(InitKind::ProductUp, 3, 1).unwrap().to_dense().unwrap(), basis(3, 0));
        assert_eq!(init_mps(InitKind::ProductDown, 3, 1).unwrap().to_dense().unwrap(), basis(3, 7));
        assert!(init_mps(InitKind::Inherit, 3, 1).is_err());
        assert!(init_mps(InitKind::Neel, 3, 0).is_err());
    }

    #[test]
    fn random_is_deterministic_normalized_canonical() {
        let a = init_mps(InitKind::Random { seed: 9 }, 7, 5).unwrap();
        let b = init_mps(InitKind::Random { seed: 9 }, 7, 5).unwrap();
        assert_eq!(a, b);
        assert!((a.norm() - 1.0).abs() < 1e-12);
        assert!(a.isometry_error() < 1e-12);
        assert_eq!(a.bond_dims(), vec![2, 4, 5, 5, 4, 2]);
    }

    #[test]
    fn canonicalize_preserves_state() {
        let mut a = init_mps(InitKind::Random { seed: 1 }, 6, 4).unwrap();
        let before = a.to_dense().unwrap();
        for c in [5, 2, 0, 3] {
            a.canonicalize(c).unwrap();
            assert!(a.isometry_error() < 1e-12);
            let after = a.to_dense().unwrap();
            for (x, y) in before.iter().zip(&after) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn dense_round_trip_and_reverse() {
        let v: Vec<f64> = (0..32).map(|i| ((i * 7 % 11) as f64 - 5.0) / 10.0).collect();
        let m = MatrixProductState::from_dense(&v, 5).unwrap();
        let back = m.to_dense().unwrap();
        for (x, y) in v.iter().zip(&back) {
            assert!((x - y).abs() < 1e-12);
        }
        let r = m.reversed().to_dense().unwrap();
        for (i, x) in r.iter().enumerate() {
            let mut j = 0;
            for k in 0..5 {
                j |= ((i >> k) & 1) << (4 - k);
            }
            assert!((x - v[j]).abs() < 1e-12);
        }
    }
}
