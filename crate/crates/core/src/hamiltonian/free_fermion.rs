use ndarray::Array2;

use super::spin_chain::SpinChainSpec;
use crate::error::{Error, Result};
use crate::linalg::eigh_real;

/// The two chain families that map onto free fermions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FreeFermionFamily {
    /// `Jx = Jy`, no `Jz`, no fields.
    Xx,
    /// `Jx = Jy = hz = 0`: Ising `Jz` bonds with a transverse `hx` field.
    TransverseIsing,
}

impl FreeFermionFamily {
    pub fn classify(spec: &SpinChainSpec) -> Option<Self> {
        if spec.jz == 0.0 && spec.hx == 0.0 && spec.hz == 0.0 && spec.jx == spec.jy {
            Some(Self::Xx)
        } else if spec.jx == 0.0 && spec.jy == 0.0 && spec.hz == 0.0 {
            Some(Self::TransverseIsing)
        } else {
            None
        }
    }
}

/// Exact open-chain ground energy from the single-particle spectrum.
///
/// XX chains hop with single-particle energies `Jx cos(k pi / (L + 1))`;
/// the ground state fills every negative level. Transverse-field Ising
/// chains `a sum Z_i Z_{i+1} + b sum X_i` have `E0 = -sum_k s_k` over the
/// singular values of the bidiagonal matrix with diagonal `b` and
/// superdiagonal `a`.
pub fn free_fermion_ground_energy(spec: &SpinChainSpec) -> Result<f64> {
    spec.validate()?;
    let l = spec.l;
    match FreeFermionFamily::classify(spec) {
        Some(FreeFermionFamily::Xx) => {
            let mut levels: Vec<f64> = (1..=l)
                .map(|k| spec.jx * (k as f64 * std::f64::consts::PI / (l as f64 + 1.0)).cos())
                .filter(|&e| e < 0.0)
                .collect();
            levels.sort_by(f64::total_cmp);
            Ok(levels.iter().sum())
        }
        Some(FreeFermionFamily::TransverseIsing) => {
            let bond = spec.jz / 4.0;
            let field = spec.hx / 2.0;
            // singular values of T from the symmetric embedding [[0, T], [T^t, 0]],
            // whose spectrum is {+s_k, -s_k}
            let mut emb = Array2::<f64>::zeros((2 * l, 2 * l));
            for i in 0..l {
                emb[[i, l + i]] = field;
                emb[[l + i, i]] = field;
                if i + 1 < l {
                    emb[[i, l + i + 1]] = bond;
                    emb[[l + i + 1, i]] = bond;
                }
            }
            let (vals, _) = eigh_real(&emb)?;
            let mut mags: Vec<f64> = vals.iter().map(|v| v.abs()).collect();
            mags.sort_by(f64::total_cmp);
            Ok(-0.5 * mags.iter().sum::<f64>())
        }
        None => Err(Error::invalid("spin chain is neither XX nor transverse-field Ising")),
    }
}
