use ndarray::Array1;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::pauli::PauliHamiltonian;
use crate::error::{Error, Result};
use crate::linalg::{eigh_complex, lowest_eigenpair, LanczosOptions};
use crate::C64;

/// Largest site count solved by dense diagonalization.
pub const DENSE_CUTOFF: usize = 10;
/// Largest site count accepted at all.
pub const EXACT_CAP: usize = 14;

/// Ground energy and a unit-norm ground state. Dense up to
/// [`DENSE_CUTOFF`] sites, restarted Lanczos (Ritz residual 1e-12) above.
pub fn exact_ground(h: &PauliHamiltonian) -> Result<(f64, Vec<C64>)> {
    let n = h.num_sites();
    if n > EXACT_CAP {
        return Err(Error::SizeOverCap { what: "exact diagonalization", got: n, cap: EXACT_CAP });
    }
    if n <= DENSE_CUTOFF {
        let (vals, vecs) = eigh_complex(&h.to_dense())?;
        return Ok((vals[0], vecs.column(0).to_vec()));
    }
    let dim = h.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(0x6a09e667);
    let start = Array1::from_shape_fn(dim, |_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    let opts = LanczosOptions { krylov_dim: 48, tol: 1e-12, max_restarts: 400, seed: 1 };
    let mut buf = vec![C64::new(0.0, 0.0); dim];
    let pair = lowest_eigenpair(
        |v: &Array1<C64>| {
            h.apply_into(v.as_slice().expect("contiguous"), &mut buf);
            Array1::from(buf.clone())
        },
        start,
        opts,
    )?;
    if !pair.converged {
        return Err(Error::Linalg(format!("Lanczos stalled at residual {:.3e}", pair.residual)));
    }
    Ok((pair.value, pair.vector.to_vec()))
}
