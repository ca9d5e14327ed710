//! Dense helpers shared by the solvers: tensor contraction, a restarted
//! Lanczos eigensolver, and Hermitian matrix functions.

mod lanczos;
mod tensor;

pub use lanczos::{lowest_eigenpair, Eigenpair, LanczosOptions};
pub use tensor::{tensordot, to_matrix};

use faer::{Mat, MatRef, Side};
use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::C64;

/// Element types the dense routines work over: `f64` and `C64`.
pub trait Scalar: ndarray::LinalgScalar + faer::traits::ComplexField + Send + Sync + std::fmt::Debug {
    fn conj(self) -> Self;
    fn re(self) -> f64;
    fn abs_sqr(self) -> f64;
    fn from_real(x: f64) -> Self;
    fn scale(self, x: f64) -> Self;
}

impl Scalar for f64 {
    fn conj(self) -> Self {
        self
    }
    fn re(self) -> f64 {
        self
    }
    fn abs_sqr(self) -> f64 {
        self * self
    }
    fn from_real(x: f64) -> Self {
        x
    }
    fn scale(self, x: f64) -> Self {
        self * x
    }
}

impl Scalar for C64 {
    fn conj(self) -> Self {
        num_complex::Complex::conj(&self)
    }
    fn re(self) -> f64 {
        self.re
    }
    fn abs_sqr(self) -> f64 {
        self.norm_sqr()
    }
    fn from_real(x: f64) -> Self {
        C64::new(x, 0.0)
    }
    fn scale(self, x: f64) -> Self {
        self * x
    }
}

fn to_faer<A: Scalar>(m: &Array2<A>) -> Mat<A> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[[i, j]])
}

fn from_faer<A: Scalar>(m: MatRef<'_, A>) -> Array2<A> {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)])
}

fn eigh<A: Scalar>(m: &Array2<A>) -> Result<(Array1<f64>, Array2<A>)> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch { expected: m.nrows(), got: m.ncols() });
    }
    let evd = to_faer(m).self_adjoint_eigen(Side::Lower).map_err(|e| Error::Linalg(format!("{e:?}")))?;
    let vals = evd.S().column_vector().iter().map(|&v| v.re()).collect();
    Ok((vals, from_faer(evd.U())))
}

/// Eigen-decomposition of a Hermitian complex matrix, eigenvalues ascending.
pub fn eigh_complex(m: &Array2<C64>) -> Result<(Array1<f64>, Array2<C64>)> {
    eigh(m)
}

/// Eigen-decomposition of a real symmetric matrix, eigenvalues ascending.
pub fn eigh_real(m: &Array2<f64>) -> Result<(Array1<f64>, Array2<f64>)> {
    eigh(m)
}

/// Thin SVD `m = u diag(s) vt`, singular values descending.
pub fn svd(m: &Array2<f64>) -> Result<(Array2<f64>, Array1<f64>, Array2<f64>)> {
    let dec = to_faer(m).thin_svd().map_err(|e| Error::Linalg(format!("{e:?}")))?;
    let s = dec.S().column_vector().iter().copied().collect();
    let vt = from_faer(dec.V().transpose());
    Ok((from_faer(dec.U()), s, vt))
}

/// Thin QR: `q` has `min(rows, cols)` orthonormal columns.
pub fn qr(m: &Array2<f64>) -> (Array2<f64>, Array2<f64>) {
    let dec = to_faer(m).qr();
    (from_faer(dec.compute_thin_Q().as_ref()), from_faer(dec.thin_R()))
}

/// Solves the square system `a x = b` by partial-pivot LU.
pub fn solve(a: &Array2<f64>, b: &Array1<f64>) -> Result<Array1<f64>> {
    use faer::linalg::solvers::Solve;
    let n = a.nrows();
    if a.ncols() != n || b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: b.len() });
    }
    let rhs = Mat::from_fn(n, 1, |i, _| b[i]);
    let x = to_faer(a).partial_piv_lu().solve(&rhs);
    let out: Array1<f64> = (0..n).map(|i| x[(i, 0)]).collect();
    if out.iter().all(|v| v.is_finite()) {
        Ok(out)
    } else {
        Err(Error::Linalg("singular system".into()))
    }
}

/// `exp(t * H)` for Hermitian `H` via its eigen-decomposition.
pub fn expm_hermitian(h: &Array2<C64>, t: f64) -> Result<Array2<C64>> {
    let (vals, vecs) = eigh_complex(h)?;
    let mut scaled = vecs.clone();
    for (j, &v) in vals.iter().enumerate() {
        let f = (t * v).exp();
        scaled.column_mut(j).mapv_inplace(|z| z * f);
    }
    Ok(scaled.dot(&vecs.t().mapv(|z| z.conj())))
}

/// Frobenius norm of a complex matrix.
pub fn frobenius(m: &Array2<C64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest deviation from Hermiticity, `max |m_ij - conj(m_ji)|`.
pub fn hermiticity_error(m: &Array2<C64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((m[[i, j]] - m[[j, i]].conj()).norm());
        }
    }
    worst
}
