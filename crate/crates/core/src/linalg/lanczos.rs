use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{eigh_real, Scalar};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct LanczosOptions {
    /// Krylov vectors per restart cycle, at least 2.
    pub krylov_dim: usize,
    /// Converged when the Ritz residual norm drops to this value.
    pub tol: f64,
    pub max_restarts: usize,
    /// Seed for the replacement start vector on a zero start.
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self { krylov_dim: 20, tol: 1e-10, max_restarts: 200, seed: 0x5eed }
    }
}

#[derive(Debug, Clone)]
pub struct Eigenpair<A> {
    pub value: f64,
    pub vector: Array1<A>,
    /// Residual estimate `|beta_m * y_m|` from the last cycle.
    pub residual: f64,
    pub matvecs: usize,
    pub converged: bool,
}

fn dot<A: Scalar>(u: &Array1<A>, v: &Array1<A>) -> A {
    u.iter().zip(v).fold(A::zero(), |acc, (&a, &b)| acc + a.conj() * b)
}

fn norm<A: Scalar>(v: &Array1<A>) -> f64 {
    v.iter().map(|a| a.abs_sqr()).sum::<f64>().sqrt()
}

fn random_start<A: Scalar>(n: usize, seed: u64) -> Array1<A> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Array1::from_shape_fn(n, |_| A::from_real(rng.random::<f64>() - 0.5))
}

/// Lowest eigenpair of the Hermitian operator `matvec` by explicitly
/// restarted Lanczos with full reorthogonalization.
///
/// Each cycle builds a Krylov basis of `krylov_dim` vectors from the current
/// Ritz vector. A zero start vector is replaced by a seeded random one.
pub fn lowest_eigenpair<A, F>(mut matvec: F, start: Array1<A>, opts: LanczosOptions) -> Result<Eigenpair<A>>
where
    A: Scalar,
    F: FnMut(&Array1<A>) -> Array1<A>,
{
    let n = start.len();
    if n == 0 {
        return Err(Error::invalid("empty start vector"));
    }
    let m = opts.krylov_dim.max(2).min(n);
    let mut x = start;
    let mut x_norm = norm(&x);
    if !(x_norm > 1e-300) || !x_norm.is_finite() {
        x = random_start(n, opts.seed);
        x_norm = norm(&x);
    }
    x.mapv_inplace(|a| a.scale(1.0 / x_norm));

    let mut matvecs = 0;
    let mut best = Eigenpair { value: f64::INFINITY, vector: x.clone(), residual: f64::INFINITY, matvecs: 0, converged: false };

    for _cycle in 0..=opts.max_restarts {
        let mut basis: Vec<Array1<A>> = Vec::with_capacity(m);
        let mut alpha: Vec<f64> = Vec::with_capacity(m);
        let mut beta: Vec<f64> = Vec::with_capacity(m);
        basis.push(x.clone());
        let mut breakdown = false;

        for j in 0..m {
            let mut w = matvec(&basis[j]);
            matvecs += 1;
            let a = dot(&basis[j], &w).re();
            alpha.push(a);
            // two passes of classical Gram-Schmidt against the whole basis
            for _ in 0..2 {
                for v in &basis {
                    let c = dot(v, &w);
                    w.zip_mut_with(v, |wi, &vi| *wi -= c * vi);
                }
            }
            let b = norm(&w);
            beta.push(b);
            let scale = a.abs().max(alpha.iter().fold(0.0f64, |s, x| s.max(x.abs()))).max(1.0);
            if b <= 1e-13 * scale {
                breakdown = true;
                break;
            }
            if j + 1 < m {
                w.mapv_inplace(|wi| wi.scale(1.0 / b));
                basis.push(w);
            }
        }

        let k = alpha.len();
        let mut t = Array2::<f64>::zeros((k, k));
        for i in 0..k {
            t[[i, i]] = alpha[i];
            if i + 1 < k {
                t[[i, i + 1]] = beta[i];
                t[[i + 1, i]] = beta[i];
            }
        }
        let (vals, vecs) = eigh_real(&t)?;
        let theta = vals[0];
        let y = vecs.column(0);
        let mut ritz = Array1::<A>::zeros(n);
        for (i, v) in basis.iter().enumerate().take(k) {
            let c = A::from_real(y[i]);
            ritz.zip_mut_with(v, |r, &vi| *r += c * vi);
        }
        let rn = norm(&ritz);
        ritz.mapv_inplace(|r| r.scale(1.0 / rn));
        let residual = if breakdown { 0.0 } else { (beta[k - 1] * y[k - 1]).abs() };

        if theta <= best.value || residual < best.residual {
            best = Eigenpair { value: theta, vector: ritz.clone(), residual, matvecs, converged: false };
        }
        if residual <= opts.tol || breakdown || k == n {
            return Ok(Eigenpair { value: theta, vector: ritz, residual, matvecs, converged: true });
        }
        x = ritz;
    }
    best.matvecs = matvecs;
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::C64;

    fn laplacian(n: usize) -> Array2<f64> {
        let mut m = Array2::zeros((n, n));
        for i in 0..n {
            m[[i, i]] = 2.0;
            if i + 1 < n {
                m[[i, i + 1]] = -1.0;
                m[[i + 1, i]] = -1.0;
            }
        }
        m
    }

    #[test]
    fn finds_lowest_of_path_laplacian() {
        let n = 60;
        let m = laplacian(n);
        let exact = 2.0 - 2.0 * (std::f64::consts::PI / (n as f64 + 1.0)).cos();
        let start = Array1::from_shape_fn(n, |i| 1.0 + (i as f64 * 0.37).sin());
        let opts = LanczosOptions { krylov_dim: 12, tol: 1e-11, ..Default::default() };
        let pair = lowest_eigenpair(|v| m.dot(v), start, opts).unwrap();
        assert!(pair.converged);
        assert!((pair.value - exact).abs() < 1e-10, "{} vs {}", pair.value, exact);
        let r = m.dot(&pair.vector) - &pair.vector * pair.value;
        assert!(r.iter().map(|x| x * x).sum::<f64>().sqrt() < 1e-9);
    }

    #[test]
    fn zero_start_is_replaced() {
        let m = laplacian(5);
        let pair = lowest_eigenpair(|v| m.dot(v), Array1::zeros(5), LanczosOptions::default()).unwrap();
        let exact = 2.0 - 2.0 * (std::f64::consts::PI / 6.0).cos();
        assert!((pair.value - exact).abs() < 1e-12);
    }

    #[test]
    fn complex_hermitian() {
        // [[1, i], [-i, 1]] has eigenvalues 0 and 2
        let m = ndarray::array![[C64::new(1.0, 0.0), C64::new(0.0, 1.0)], [C64::new(0.0, -1.0), C64::new(1.0, 0.0)]];
        let start = ndarray::array![C64::new(1.0, 0.0), C64::new(0.3, 0.0)];
        let pair = lowest_eigenpair(|v| m.dot(v), start, LanczosOptions::default()).unwrap();
        assert!(pair.value.abs() < 1e-12);
    }
}
