use ndarray::{Array1, Array2};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{eigh_complex, expm_hermitian, hermiticity_error};
use crate::C64;

/// Largest dense dimension accepted by [`factorize`].
pub const FACTOR_DIM_CAP: usize = 64;
/// Added to the largest off-diagonal eigenvalue so the quadratic part is
/// strictly positive.
pub const SHIFT_MARGIN: f64 = 1e-6;
const HERMITIAN_TOL: f64 = 1e-10;
const NEGATIVE_TOL: f64 = 1e-9;

/// One auxiliary field: weight `mu` on the rank-one projector `u u^dagger`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub weight: f64,
    pub vector: Array1<C64>,
}

impl Field {
    pub fn projector(&self) -> Array2<C64> {
        let n = self.vector.len();
        Array2::from_shape_fn((n, n), |(i, j)| self.vector[i] * self.vector[j].conj())
    }
}

/// `H = D - 1/2 sum_g mu_g P_g + shift I` with `D` the diagonal of `H`.
#[derive(Debug, Clone, PartialEq)]
pub struct HsFactorization {
    pub one_body: Array1<f64>,
    pub fields: Vec<Field>,
    pub shift: f64,
    pub dim: usize,
    /// `sum 1/2 mu ||P||_F` over the dropped fields.
    pub factorization_residual: f64,
    source: Array2<C64>,
}

pub fn factorize(h: &Array2<C64>, field_cutoff: f64) -> Result<HsFactorization> {
    let dim = h.nrows();
    if dim == 0 || h.ncols() != dim {
        return Err(Error::invalid("factorization needs a square matrix"));
    }
    if dim > FACTOR_DIM_CAP {
        return Err(Error::SizeOverCap { what: "projector dimension", got: dim, cap: FACTOR_DIM_CAP });
    }
    let herm = hermiticity_error(h);
    if herm > HERMITIAN_TOL {
        return Err(Error::invalid(format!("matrix is not Hermitian (deviation {herm:e})")));
    }
    if !(field_cutoff >= 0.0) {
        return Err(Error::invalid("field_cutoff must be >= 0"));
    }
    let one_body = Array1::from_shape_fn(dim, |i| h[[i, i]].re);
    let mut off = h.clone();
    for i in 0..dim {
        off[[i, i]] = C64::new(0.0, 0.0);
    }
    if off.iter().all(|z| z.norm() == 0.0) {
        return Ok(HsFactorization { one_body, fields: Vec::new(), shift: 0.0, dim, factorization_residual: 0.0, source: h.clone() });
    }
    let (kvals, _) = eigh_complex(&off)?;
    let shift = kvals[dim - 1] + SHIFT_MARGIN;
    // M = 2 (shift I - K)
    let mut m = off.mapv(|z| -2.0 * z);
    for i in 0..dim {
        m[[i, i]] += 2.0 * shift;
    }
    let (mus, vecs) = eigh_complex(&m)?;
    if mus[0] < -NEGATIVE_TOL {
        return Err(Error::invalid(format!("shifted quadratic part has eigenvalue {:e}", mus[0])));
    }
    let mut fields = Vec::new();
    let mut residual = 0.0;
    for (g, &mu) in mus.iter().enumerate() {
        let mu = mu.max(0.0);
        if mu <= 0.0 || mu < field_cutoff {
            // a rank-one projector has unit Frobenius norm
            residual += 0.5 * mu;
            continue;
        }
        fields.push(Field { weight: mu, vector: vecs.column(g).to_owned() });
    }
    Ok(HsFactorization { one_body, fields, shift, dim, factorization_residual: residual, source: h.clone() })
}

impl HsFactorization {
    pub fn source(&self) -> &Array2<C64> {
        &self.source
    }

    /// `D - 1/2 sum mu P + shift I` from the kept fields.
    pub fn recompose(&self) -> Array2<C64> {
        let mut out = Array2::<C64>::zeros((self.dim, self.dim));
        for i in 0..self.dim {
            out[[i, i]] = C64::new(self.one_body[i] + self.shift, 0.0);
        }
        for f in &self.fields {
            out.scaled_add(C64::new(-0.5 * f.weight, 0.0), &f.projector());
        }
        out
    }

    /// Applies `B(x)` to `psi` in place without forming the matrix.
    pub(crate) fn propagate(&self, psi: &mut [C64], dt: f64, x: &[f64]) {
        let half: Vec<f64> = self.one_body.iter().map(|d| (-0.5 * dt * d).exp()).collect();
        for (a, h) in psi.iter_mut().zip(&half) {
            *a *= h;
        }
        let sq = dt.sqrt();
        let mut delta = vec![C64::new(0.0, 0.0); psi.len()];
        for (f, &xg) in self.fields.iter().zip(x) {
            let factor = (sq * xg * f.weight.sqrt()).exp_m1();
            let overlap: C64 = f.vector.iter().zip(psi.iter()).map(|(u, p)| u.conj() * p).sum();
            let c = overlap * factor;
            for (d, u) in delta.iter_mut().zip(f.vector.iter()) {
                *d += c * u;
            }
        }
        for ((a, d), h) in psi.iter_mut().zip(&delta).zip(&half) {
            *a = (*a + d) * h;
        }
    }

    pub(crate) fn draw_fields<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        (0..self.fields.len()).map(|_| rng.sample(StandardNormal)).collect()
    }

    /// `exp(-dt (H - shift I))` from the source matrix.
    pub fn exact_propagator(&self, dt: f64) -> Result<Array2<C64>> {
        let mut h = self.source.clone();
        for i in 0..self.dim {
            h[[i, i]] -= C64::new(self.shift, 0.0);
        }
        expm_hermitian(&h, -dt)
    }

    /// Closed-form field average of `B(x)`:
    /// `e^{-dt D/2} [I + sum (e^{dt mu / 2} - 1) P] e^{-dt D/2}`.
    pub fn mean_propagator(&self, dt: f64) -> Array2<C64> {
        let mut mid = Array2::<C64>::eye(self.dim);
        for f in &self.fields {
            mid.scaled_add(C64::new((0.5 * dt * f.weight).exp_m1(), 0.0), &f.projector());
        }
        self.sandwich(mid, dt)
    }

    fn sandwich(&self, mut mid: Array2<C64>, dt: f64) -> Array2<C64> {
        let half: Vec<f64> = self.one_body.iter().map(|d| (-0.5 * dt * d).exp()).collect();
        for ((i, j), z) in mid.indexed_iter_mut() {
            *z *= half[i] * half[j];
        }
        mid
    }
}

/// Draws one `B(x)` as a dense matrix.
pub fn sample_propagator<R: Rng>(fact: &HsFactorization, dt: f64, rng: &mut R) -> Result<Array2<C64>> {
    if !(dt >= 0.0) {
        return Err(Error::invalid("timestep must be >= 0"));
    }
    let x = fact.draw_fields(rng);
    let sq = dt.sqrt();
    let mut mid = Array2::<C64>::eye(fact.dim);
    for (f, &xg) in fact.fields.iter().zip(&x) {
        mid.scaled_add(C64::new((sq * xg * f.weight.sqrt()).exp_m1(), 0.0), &f.projector());
    }
    Ok(fact.sandwich(mid, dt))
}
