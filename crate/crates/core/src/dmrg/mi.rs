use ndarray::{Array2, Axis};

use super::mps::MatrixProductState;
use crate::error::{Error, Result};
use crate::linalg::eigh_real;

/// Entries in `[-CLAMP, 0)` are rounding noise and are reported as zero.
const CLAMP: f64 = 1e-10;

fn entropy(rho: &Array2<f64>) -> Result<f64> {
    let (vals, _) = eigh_real(rho)?;
    Ok(vals.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.ln()).sum())
}

/// Pairwise mutual information in nats; the diagonal is NaN.
pub fn mutual_information(state: &MatrixProductState) -> Result<Array2<f64>> {
    let n2 = state.norm_sqr();
    if (n2 - 1.0).abs() > 1e-8 {
        return Err(Error::invalid(format!("mutual information needs a normalized state, norm^2 = {n2}")));
    }
    let l = state.len();
    let mut psi = state.clone();
    psi.canonicalize(0)?;
    let mut single = vec![0.0; l];
    let mut pair = Array2::<f64>::from_elem((l, l), f64::NAN);
    for i in 0..l {
        if i > 0 {
            psi.shift_right(i - 1)?;
        }
        let t = &psi.tensors()[i];
        let a = [t.index_axis(Axis(1), 0), t.index_axis(Axis(1), 1)];
        let mut rho1 = Array2::<f64>::zeros((2, 2));
        // transfer[s][s'] = A_s^T A_s'
        let mut transfer: Vec<Vec<Array2<f64>>> = Vec::with_capacity(2);
        for s in 0..2 {
            let mut row = Vec::with_capacity(2);
            for sp in 0..2 {
                let m = a[s].t().dot(&a[sp]);
                rho1[[s, sp]] = m.diag().sum();
                row.push(m);
            }
            transfer.push(row);
        }
        single[i] = entropy(&rho1)?;
        for j in i + 1..l {
            let b = &psi.tensors()[j];
            let bs = [b.index_axis(Axis(1), 0), b.index_axis(Axis(1), 1)];
            let mut rho2 = Array2::<f64>::zeros((4, 4));
            for s in 0..2 {
                for sp in 0..2 {
                    for t in 0..2 {
                        let mb = transfer[s][sp].dot(&bs[t]);
                        for tp in 0..2 {
                            // trace(B_tp^T M B_t) with right side an identity
                            rho2[[2 * s + tp, 2 * sp + t]] = (&mb * &bs[tp]).sum();
                        }
                    }
                }
            }
            let mut rho_sym = rho2.clone();
            rho_sym += &rho2.t();
            rho_sym.mapv_inplace(|x| 0.5 * x);
            let sij = entropy(&rho_sym)?;
            pair[[i, j]] = sij;
            if j + 1 < l {
                for row in transfer.iter_mut() {
                    for m in row.iter_mut() {
                        let mut next = bs[0].t().dot(&m.dot(&bs[0]));
                        next += &bs[1].t().dot(&m.dot(&bs[1]));
                        *m = next;
                    }
                }
            }
        }
    }
    let mut out = Array2::<f64>::from_elem((l, l), f64::NAN);
    for i in 0..l {
        for j in i + 1..l {
            let mut v = single[i] + single[j] - pair[[i, j]];
            if (-CLAMP..0.0).contains(&v) {
                v = 0.0;
            }
            out[[i, j]] = v;
            out[[j, i]] = v;
        }
    }
    Ok(out)
}

/// Entrywise `|candidate - reference|` with a NaN diagonal.
pub fn mi_error(candidate: &Array2<f64>, reference: &Array2<f64>) -> Result<Array2<f64>> {
    if candidate.dim() != reference.dim() || candidate.nrows() != candidate.ncols() {
        return Err(Error::invalid(format!(
            "mutual-information shapes differ: {:?} vs {:?}",
            candidate.dim(),
            reference.dim()
        )));
    }
    Ok(Array2::from_shape_fn(candidate.dim(), |(i, j)| {
        if i == j {
            f64::NAN
        } else {
            (candidate[[i, j]] - reference[[i, j]]).abs()
        }
    }))
}
