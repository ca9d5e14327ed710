//! Independent dense oracles shared by the integration tests. Nothing here
//! goes through the Pauli-string machinery or the library eigensolvers.

#![allow(dead_code)]

use gsbench::hamiltonian::SpinChainSpec;
use gsbench::C64;
use ndarray::{array, Array2};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn kron(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    Array2::from_shape_fn((ar * br, ac * bc), |(i, j)| a[[i / br, j / bc]] * b[[i % br, j % bc]])
}

fn spin(axis: usize) -> Array2<C64> {
    let half = 0.5;
    match axis {
        0 => array![[c(0.0, 0.0), c(half, 0.0)], [c(half, 0.0), c(0.0, 0.0)]],
        1 => array![[c(0.0, 0.0), c(0.0, -half)], [c(0.0, half), c(0.0, 0.0)]],
        _ => array![[c(half, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-half, 0.0)]],
    }
}

/// Operator acting as `ops[k].1` on site `ops[k].0`; site 0 is the
/// leftmost tensor factor.
fn embed(l: usize, ops: &[(usize, Array2<C64>)]) -> Array2<C64> {
    let mut out = Array2::from_elem((1, 1), c(1.0, 0.0));
    for site in 0..l {
        let factor = ops.iter().find(|(s, _)| *s == site).map(|(_, m)| m.clone()).unwrap_or_else(|| Array2::eye(2));
        out = kron(&out, &factor);
    }
    out
}

/// Dense chain Hamiltonian from explicit spin matrices.
pub fn dense_chain(spec: &SpinChainSpec) -> Array2<C64> {
    let l = spec.l;
    let dim = 1usize << l;
    let mut h = Array2::<C64>::zeros((dim, dim));
    let j = [spec.jx, spec.jy, spec.jz];
    for i in 0..l - 1 {
        for a in 0..3 {
            if j[a] != 0.0 {
                h.scaled_add(c(j[a], 0.0), &embed(l, &[(i, spin(a)), (i + 1, spin(a))]));
            }
        }
    }
    for i in 0..l {
        if spec.hx != 0.0 {
            h.scaled_add(c(-spec.hx, 0.0), &embed(l, &[(i, spin(0))]));
        }
        if spec.hz != 0.0 {
            h.scaled_add(c(-spec.hz, 0.0), &embed(l, &[(i, spin(2))]));
        }
    }
    h
}

/// Cyclic Jacobi eigenvalues of a real symmetric matrix, ascending.
pub fn jacobi_eigenvalues(m: &Array2<f64>) -> Vec<f64> {
    let n = m.nrows();
    let mut a = m.clone();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|(i, j)| i != j).map(|(i, j)| a[[i, j]].powi(2)).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[[p, q]].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[[q, q]] - a[[p, p]]) / (2.0 * a[[p, q]]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                for k in 0..n {
                    let (akp, akq) = (a[[k, p]], a[[k, q]]);
                    a[[k, p]] = cs * akp - sn * akq;
                    a[[k, q]] = sn * akp + cs * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[[p, k]], a[[q, k]]);
                    a[[p, k]] = cs * apk - sn * aqk;
                    a[[q, k]] = sn * apk + cs * aqk;
                }
            }
        }
    }
    let mut vals: Vec<f64> = (0..n).map(|i| a[[i, i]]).collect();
    vals.sort_by(|x, y| x.partial_cmp(y).unwrap());
    vals
}

/// Eigenvalues of a Hermitian matrix through its real `2n x 2n` embedding,
/// where every eigenvalue appears twice.
pub fn hermitian_eigenvalues(m: &Array2<C64>) -> Vec<f64> {
    let n = m.nrows();
    let big = Array2::from_shape_fn((2 * n, 2 * n), |(i, j)| {
        let z = m[[i % n, j % n]];
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    jacobi_eigenvalues(&big).chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect()
}

fn entropy(rho: &Array2<C64>) -> f64 {
    hermitian_eigenvalues(rho).iter().filter(|&&p| p > 1e-15).map(|&p| -p * p.ln()).sum()
}

/// Reduced density matrix of `sites` (ascending) from a normalized state.
pub fn reduced_density(psi: &[C64], l: usize, sites: &[usize]) -> Array2<C64> {
    let k = sites.len();
    let mut rho = Array2::<C64>::zeros((1 << k, 1 << k));
    let bit = |b: usize, site: usize| (b >> (l - 1 - site)) & 1;
    let sub = |b: usize| sites.iter().fold(0, |acc, &s| (acc << 1) | bit(b, s));
    let mask: usize = sites.iter().map(|&s| 1usize << (l - 1 - s)).sum();
    for (b, &amp_b) in psi.iter().enumerate() {
        if amp_b.norm_sqr() == 0.0 {
            continue;
        }
        let rest = b & !mask;
        // enumerate partners sharing the environment bits
        for sb in 0..(1usize << k) {
            let mut partner = rest;
            for (idx, &s) in sites.iter().enumerate() {
                if (sb >> (k - 1 - idx)) & 1 == 1 {
                    partner |= 1 << (l - 1 - s);
                }
            }
            rho[[sub(b), sb]] += amp_b * psi[partner].conj();
        }
    }
    rho
}

/// `I_ij = S_i + S_j - S_ij`, NaN on the diagonal.
pub fn dense_mutual_information(psi: &[C64], l: usize) -> Array2<f64> {
    let single: Vec<f64> = (0..l).map(|i| entropy(&reduced_density(psi, l, &[i]))).collect();
    let mut out = Array2::from_elem((l, l), f64::NAN);
    for i in 0..l {
        for j in i + 1..l {
            let v = single[i] + single[j] - entropy(&reduced_density(psi, l, &[i, j]));
            out[[i, j]] = v;
            out[[j, i]] = v;
        }
    }
    out
}

/// Lowest eigenvalue of a dense Hermitian matrix by the real embedding.
/// Cubic in `2 dim`, so only for small matrices.
pub fn dense_lowest(m: &Array2<C64>) -> f64 {
    hermitian_eigenvalues(m)[0]
}

/// Gaussian Hermitian matrix with a fixed seed.
pub fn random_hermitian(dim: usize, seed: u64) -> Array2<C64> {
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut g = || -> f64 { StandardNormal.sample(&mut rng) };
    let raw = Array2::from_shape_fn((dim, dim), |_| c(g(), g()));
    Array2::from_shape_fn((dim, dim), |(i, j)| (raw[[i, j]] + raw[[j, i]].conj()) * 0.5)
}

/// Lowest energy of the open XXZ chain (`jx = jy = j_xy`, no fields) in
/// the zero-magnetization sector, built from spin-flip rules. `l` even.
pub fn xxz_sector_lowest(l: usize, j_xy: f64, jz: f64) -> f64 {
    let states: Vec<usize> = (0..1usize << l).filter(|b| b.count_ones() as usize == l / 2).collect();
    let index = |b: usize| states.binary_search(&b).unwrap();
    let n = states.len();
    let mut h = Array2::<f64>::zeros((n, n));
    for (k, &b) in states.iter().enumerate() {
        for i in 0..l - 1 {
            let (p, q) = (l - 1 - i, l - 2 - i);
            let (u, v) = ((b >> p) & 1, (b >> q) & 1);
            h[[k, k]] += jz * if u == v { 0.25 } else { -0.25 };
            if u != v {
                let flipped = b ^ (1 << p) ^ (1 << q);
                h[[index(flipped), k]] += 0.5 * j_xy;
            }
        }
    }
    jacobi_eigenvalues(&h)[0]
}

/// Open XX chain `j sum (Sx Sx + Sy Sy)`: fermions hopping with amplitude
/// `j / 2`, ground state fills the negative levels.
pub fn xx_free_fermion(l: usize, j: f64) -> f64 {
    let hop = Array2::from_shape_fn((l, l), |(a, b)| if a.abs_diff(b) == 1 { 0.5 * j } else { 0.0 });
    jacobi_eigenvalues(&hop).into_iter().filter(|&e| e < 0.0).sum()
}

/// Open transverse Ising chain `jz sum Sz Sz - hx sum Sx`. After a basis
/// rotation it is `a sum X X + b sum Z` with `a = jz / 4`, `b = hx / 2`;
/// Jordan-Wigner gives hopping and pairing both equal to `a`, and
/// `E0 = -1/2 sum_k eps_k` with `eps_k^2` the spectrum of `(A+B)^T (A+B)`.
pub fn tfim_free_fermion(l: usize, jz: f64, hx: f64) -> f64 {
    let (a, b) = (jz / 4.0, hx / 2.0);
    let mut apb = Array2::<f64>::zeros((l, l));
    for i in 0..l {
        apb[[i, i]] = -2.0 * b;
        if i + 1 < l {
            // A symmetric, B antisymmetric: the upper entry doubles, the lower cancels
            apb[[i, i + 1]] = 2.0 * a;
        }
    }
    let gram = apb.t().dot(&apb);
    -0.5 * jacobi_eigenvalues(&gram).iter().map(|e| e.max(0.0).sqrt()).sum::<f64>()
}
