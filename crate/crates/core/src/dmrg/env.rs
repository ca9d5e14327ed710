//! Environment contractions and effective-Hamiltonian products.
//!
//! A left environment channel `L[a]` is indexed `(bra, ket)` on the bond
//! to the left of a site, a right channel `R[b]` is indexed `(ket, bra)` on
//! the bond to the right. Every product is a short sequence of GEMMs on the
//! `(left, right)` matrices of a fixed physical index.

use ndarray::{Array2, Array3, Array4, ArrayView3, ArrayView4, Axis};

use super::mpo::Entry;

pub(crate) type Env = Vec<Array2<f64>>;

pub(crate) fn boundary() -> Env {
    vec![Array2::ones((1, 1))]
}

pub(crate) fn extend_left(env: &Env, a: &Array3<f64>, w: &[Entry], right_dim: usize) -> Env {
    let (_, _, r) = a.dim();
    let x: Vec<[Array2<f64>; 2]> =
        env.iter().map(|la| [la.dot(&a.index_axis(Axis(1), 0)), la.dot(&a.index_axis(Axis(1), 1))]).collect();
    let mut y: Vec<[Array2<f64>; 2]> = (0..right_dim).map(|_| zeros_pair(x[0][0].dim())).collect();
    for e in w {
        y[e.right][e.out].scaled_add(e.value, &x[e.left][e.inp]);
    }
    y.into_iter()
        .map(|yb| {
            let mut out = Array2::<f64>::zeros((r, r));
            for (t, yt) in yb.iter().enumerate() {
                ndarray::linalg::general_mat_mul(1.0, &a.index_axis(Axis(1), t).t(), yt, 1.0, &mut out);
            }
            out
        })
        .collect()
}

pub(crate) fn extend_right(env: &Env, b: &Array3<f64>, w: &[Entry], left_dim: usize) -> Env {
    let (l, _, _) = b.dim();
    let x: Vec<[Array2<f64>; 2]> =
        env.iter().map(|rb| [b.index_axis(Axis(1), 0).dot(rb), b.index_axis(Axis(1), 1).dot(rb)]).collect();
    let mut y: Vec<[Array2<f64>; 2]> = (0..left_dim).map(|_| zeros_pair(x[0][0].dim())).collect();
    for e in w {
        y[e.left][e.out].scaled_add(e.value, &x[e.right][e.inp]);
    }
    y.into_iter()
        .map(|ya| {
            let mut out = Array2::<f64>::zeros((l, l));
            for (t, yt) in ya.iter().enumerate() {
                ndarray::linalg::general_mat_mul(1.0, yt, &b.index_axis(Axis(1), t).t(), 1.0, &mut out);
            }
            out
        })
        .collect()
}

fn zeros_pair(dim: (usize, usize)) -> [Array2<f64>; 2] {
    [Array2::zeros(dim), Array2::zeros(dim)]
}

/// Effective one-site Hamiltonian applied to `theta (l, 2, r)`.
pub(crate) fn apply_one_site(left: &Env, right: &Env, w: &[Entry], theta: ArrayView3<f64>) -> Array3<f64> {
    let (l, _, r) = theta.dim();
    let x: Vec<[Array2<f64>; 2]> = left
        .iter()
        .map(|la| [la.dot(&theta.index_axis(Axis(1), 0)), la.dot(&theta.index_axis(Axis(1), 1))])
        .collect();
    let mut y: Vec<[Array2<f64>; 2]> = (0..right.len()).map(|_| zeros_pair((l, r))).collect();
    for e in w {
        y[e.right][e.out].scaled_add(e.value, &x[e.left][e.inp]);
    }
    let mut out = Array3::<f64>::zeros((l, 2, r));
    for (b, yb) in y.iter().enumerate() {
        for t in 0..2 {
            let mut o = out.index_axis_mut(Axis(1), t);
            ndarray::linalg::general_mat_mul(1.0, &yb[t], &right[b], 1.0, &mut o);
        }
    }
    out
}

/// Effective two-site Hamiltonian applied to `theta (l, 2, 2, r)`.
pub(crate) fn apply_two_site(
    left: &Env,
    right: &Env,
    w1: &[Entry],
    w2: &[Entry],
    mid_dim: usize,
    theta: ArrayView4<f64>,
) -> Array4<f64> {
    let (l, _, _, r) = theta.dim();
    let slice = |s1: usize, s2: usize| theta.index_axis(Axis(1), s1).index_axis_move(Axis(1), s2);
    let x: Vec<[[Array2<f64>; 2]; 2]> = left
        .iter()
        .map(|la| {
            [[la.dot(&slice(0, 0)), la.dot(&slice(0, 1))], [la.dot(&slice(1, 0)), la.dot(&slice(1, 1))]]
        })
        .collect();
    let quad = || [zeros_pair((l, r)), zeros_pair((l, r))];
    let mut y: Vec<[[Array2<f64>; 2]; 2]> = (0..mid_dim).map(|_| quad()).collect();
    for e in w1 {
        for s2 in 0..2 {
            y[e.right][e.out][s2].scaled_add(e.value, &x[e.left][e.inp][s2]);
        }
    }
    let mut z: Vec<[[Array2<f64>; 2]; 2]> = (0..right.len()).map(|_| quad()).collect();
    for e in w2 {
        for t1 in 0..2 {
            z[e.right][t1][e.out].scaled_add(e.value, &y[e.left][t1][e.inp]);
        }
    }
    let mut out = Array4::<f64>::zeros((l, 2, 2, r));
    for (c, zc) in z.iter().enumerate() {
        for t1 in 0..2 {
            for t2 in 0..2 {
                let mut o = out.index_axis_mut(Axis(1), t1);
                let mut o = o.index_axis_mut(Axis(1), t2);
                ndarray::linalg::general_mat_mul(1.0, &zc[t1][t2], &right[c], 1.0, &mut o);
            }
        }
    }
    out
}
