//! Derivative-free local minimizers.
//!
//! All three drive a caller-supplied objective that may refuse further
//! evaluations by returning `None` (budget or step cap reached); the
//! minimizer then stops immediately. Best-seen bookkeeping lives with the
//! caller, so a minimizer never needs to report its final point.

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::solve;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    /// COBYLA-style: linear interpolation model on a simplex, trust radius
    /// shrinking from `rhobeg` down to `tol`.
    LinearTrustRegion,
    /// Powell-style conjugate directions with Brent line searches to `xtol`.
    LineSearchCyclic,
    /// Nelder-Mead with initial edge `rhobeg`.
    Simplex,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSpec {
    pub kind: OptimizerKind,
    pub rhobeg: f64,
    pub tol: f64,
    pub xtol: f64,
    pub max_steps: u64,
    #[serde(default)]
    pub seed: u64,
}

impl OptimizerSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.rhobeg > 0.0 && self.rhobeg.is_finite()) {
            return Err(Error::invalid("rhobeg must be > 0"));
        }
        if !(self.tol > 0.0) {
            return Err(Error::invalid("tol must be > 0"));
        }
        if !(self.xtol > 0.0) {
            return Err(Error::invalid("xtol must be > 0"));
        }
        if self.max_steps == 0 {
            return Err(Error::invalid("max_steps must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    /// The objective refused an evaluation (step cap or budget).
    Exhausted,
}

type Objective<'a> = dyn FnMut(&[f64]) -> Option<f64> + 'a;

/// Minimizes from `x0`, whose value `f0` the caller already knows.
pub fn minimize(spec: &OptimizerSpec, x0: &[f64], f0: f64, f: &mut Objective<'_>) -> StopReason {
    if x0.is_empty() {
        return StopReason::Converged;
    }
    let out = match spec.kind {
        OptimizerKind::Simplex => nelder_mead(spec, x0, f0, f),
        OptimizerKind::LineSearchCyclic => powell(spec, x0, f0, f),
        OptimizerKind::LinearTrustRegion => linear_trust_region(spec, x0, f0, f),
    };
    out.unwrap_or(StopReason::Exhausted)
}

fn axpy(x: &[f64], a: f64, d: &[f64]) -> Vec<f64> {
    x.iter().zip(d).map(|(xi, di)| xi + a * di).collect()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn nelder_mead(spec: &OptimizerSpec, x0: &[f64], f0: f64, f: &mut Objective<'_>) -> Option<StopReason> {
    let n = x0.len();
    let mut pts: Vec<(Vec<f64>, f64)> = vec![(x0.to_vec(), f0)];
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += spec.rhobeg;
        let fx = f(&x)?;
        pts.push((x, fx));
    }
    loop {
        pts.sort_by(|a, b| a.1.total_cmp(&b.1));
        let f_spread = pts.iter().map(|p| (p.1 - pts[0].1).abs()).fold(0.0, f64::max);
        let x_spread = pts
            .iter()
            .flat_map(|p| p.0.iter().zip(&pts[0].0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if f_spread <= spec.tol && x_spread <= spec.xtol {
            return Some(StopReason::Converged);
        }
        let mut centroid = vec![0.0; n];
        for p in &pts[..n] {
            for (c, v) in centroid.iter_mut().zip(&p.0) {
                *c += v / n as f64;
            }
        }
        let worst = pts[n].clone();
        let toward = |t: f64| -> Vec<f64> { centroid.iter().zip(&worst.0).map(|(c, w)| c + t * (c - w)).collect() };

        let xr = toward(1.0);
        let fr = f(&xr)?;
        if fr < pts[0].1 {
            let xe = toward(2.0);
            let fe = f(&xe)?;
            pts[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < pts[n - 1].1 {
            pts[n] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < worst.1 {
            let xc = toward(0.5);
            let fc = f(&xc)?;
            (xc, fc)
        } else {
            let xc = toward(-0.5);
            let fc = f(&xc)?;
            (xc, fc)
        };
        if fc < fr.min(worst.1) {
            pts[n] = (xc, fc);
            continue;
        }
        let best = pts[0].0.clone();
        for p in pts.iter_mut().skip(1) {
            let x: Vec<f64> = best.iter().zip(&p.0).map(|(b, v)| b + 0.5 * (v - b)).collect();
            let fx = f(&x)?;
            *p = (x, fx);
        }
    }
}

const GOLD: f64 = 1.618_033_988_749_895;
const CGOLD: f64 = 0.381_966_011_250_105;

/// Minimizes `f(x + t d)` over `t`, starting from `t = 0` with value `f0`.
/// Returns the best `(t, value)` found.
fn line_search(x: &[f64], d: &[f64], f0: f64, step: f64, xtol: f64, f: &mut Objective<'_>) -> Option<(f64, f64)> {
    let mut g = |t: f64| f(&axpy(x, t, d));
    // bracket
    let (mut ax, mut fa) = (0.0, f0);
    let (mut bx, mut fb) = (step, g(step)?);
    if fb > fa {
        std::mem::swap(&mut ax, &mut bx);
        std::mem::swap(&mut fa, &mut fb);
    }
    let mut cx = bx + GOLD * (bx - ax);
    let mut fc = g(cx)?;
    let mut grow = 0;
    while fb > fc && grow < 60 {
        ax = bx;
        fa = fb;
        bx = cx;
        fb = fc;
        cx = bx + GOLD * (bx - ax);
        fc = g(cx)?;
        grow += 1;
    }
    let _ = fa;
    if fb > fc {
        return Some((cx, fc));
    }
    // Brent on [a, b] around bx
    let (mut a, mut b) = if ax < cx { (ax, cx) } else { (cx, ax) };
    let (mut xb, mut fxb) = (bx, fb);
    let (mut w, mut fw, mut v, mut fv) = (bx, fb, bx, fb);
    let mut e: f64 = 0.0;
    let mut dd: f64 = 0.0;
    for _ in 0..200 {
        let xm = 0.5 * (a + b);
        let tol1 = 1e-10 * xb.abs() + 0.5 * xtol;
        let tol2 = 2.0 * tol1;
        if (xb - xm).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (xb - w) * (fxb - fv);
            let mut q = (xb - v) * (fxb - fw);
            let mut p = (xb - v) * q - (xb - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let etemp = e;
            e = dd;
            if !(p.abs() >= (0.5 * q * etemp).abs() || p <= q * (a - xb) || p >= q * (b - xb)) {
                dd = p / q;
                let u = xb + dd;
                if u - a < tol2 || b - u < tol2 {
                    dd = tol1.copysign(xm - xb);
                }
                golden = false;
            }
        }
        if golden {
            e = if xb >= xm { a - xb } else { b - xb };
            dd = CGOLD * e;
        }
        let u = if dd.abs() >= tol1 { xb + dd } else { xb + tol1.copysign(dd) };
        let fu = g(u)?;
        if fu <= fxb {
            if u >= xb {
                a = xb;
            } else {
                b = xb;
            }
            v = w;
            fv = fw;
            w = xb;
            fw = fxb;
            xb = u;
            fxb = fu;
        } else {
            if u < xb {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == xb {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == xb || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    if fxb <= f0 {
        Some((xb, fxb))
    } else {
        Some((0.0, f0))
    }
}

fn powell(spec: &OptimizerSpec, x0: &[f64], f0: f64, f: &mut Objective<'_>) -> Option<StopReason> {
    let n = x0.len();
    let mut dirs: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut d = vec![0.0; n];
            d[i] = 1.0;
            d
        })
        .collect();
    let mut x = x0.to_vec();
    let mut fx = f0;
    loop {
        let (x_start, f_start) = (x.clone(), fx);
        let (mut biggest, mut big_idx) = (0.0, 0);
        for (i, d) in dirs.iter().enumerate() {
            let before = fx;
            let (t, ft) = line_search(&x, d, fx, spec.rhobeg, spec.xtol, f)?;
            x = axpy(&x, t, d);
            fx = ft;
            if before - fx > biggest {
                biggest = before - fx;
                big_idx = i;
            }
        }
        if 2.0 * (f_start - fx) <= spec.tol * (f_start.abs() + fx.abs()) + 1e-300 {
            return Some(StopReason::Converged);
        }
        let new_dir: Vec<f64> = x.iter().zip(&x_start).map(|(a, b)| a - b).collect();
        let len = new_dir.iter().map(|v| v * v).sum::<f64>().sqrt();
        if len <= spec.xtol {
            return Some(StopReason::Converged);
        }
        let x_ext: Vec<f64> = x.iter().zip(&x_start).map(|(a, b)| 2.0 * a - b).collect();
        let f_ext = f(&x_ext)?;
        if f_ext < f_start {
            let t = 2.0 * (f_start - 2.0 * fx + f_ext) * (f_start - fx - biggest).powi(2)
                - biggest * (f_start - f_ext).powi(2);
            if t < 0.0 {
                let unit: Vec<f64> = new_dir.iter().map(|v| v / len).collect();
                let (s, fs) = line_search(&x, &unit, fx, spec.rhobeg.min(len), spec.xtol, f)?;
                x = axpy(&x, s, &unit);
                fx = fs;
                dirs[big_idx] = dirs[n - 1].clone();
                dirs[n - 1] = unit;
            }
        }
    }
}

fn linear_trust_region(spec: &OptimizerSpec, x0: &[f64], f0: f64, f: &mut Objective<'_>) -> Option<StopReason> {
    let n = x0.len();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut rho = spec.rhobeg;
    let mut best = (x0.to_vec(), f0);
    let mut verts: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n);

    let rebuild = |best: &(Vec<f64>, f64), rho: f64, verts: &mut Vec<(Vec<f64>, f64)>, f: &mut Objective<'_>| -> Option<()> {
        verts.clear();
        for i in 0..n {
            let mut x = best.0.clone();
            x[i] += rho;
            let fx = f(&x)?;
            verts.push((x, fx));
        }
        Some(())
    };
    rebuild(&best, rho, &mut verts, f)?;

    loop {
        // a vertex may undercut the centre after a rebuild
        if let Some(i) = (0..n).filter(|&i| verts[i].1 < best.1).min_by(|&a, &b| verts[a].1.total_cmp(&verts[b].1)) {
            std::mem::swap(&mut verts[i], &mut best);
        }
        let mut dmat = Array2::<f64>::zeros((n, n));
        let mut df = Array1::<f64>::zeros(n);
        for (i, (v, fv)) in verts.iter().enumerate() {
            for j in 0..n {
                dmat[[i, j]] = v[j] - best.0[j];
            }
            df[i] = fv - best.1;
        }
        let grad = match solve(&dmat, &df) {
            Ok(g) if g.iter().all(|x| x.is_finite()) => g,
            _ => {
                rebuild(&best, rho, &mut verts, f)?;
                continue;
            }
        };
        let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        let dir: Vec<f64> = if gnorm > 0.0 {
            grad.iter().map(|g| -g / gnorm).collect()
        } else {
            let r: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
            let rn = r.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
            r.into_iter().map(|x| x / rn).collect()
        };
        let trial = axpy(&best.0, rho, &dir);
        let ft = f(&trial)?;
        let predicted = rho * gnorm;
        let actual = best.1 - ft;
        if ft < best.1 {
            let far = (0..n).max_by(|&a, &b| dist(&verts[a].0, &trial).total_cmp(&dist(&verts[b].0, &trial))).unwrap();
            verts[far] = std::mem::replace(&mut best, (trial, ft));
            if actual >= 0.1 * predicted {
                continue;
            }
        } else {
            let far = (0..n).max_by(|&a, &b| dist(&verts[a].0, &best.0).total_cmp(&dist(&verts[b].0, &best.0))).unwrap();
            if dist(&trial, &best.0) < dist(&verts[far].0, &best.0) {
                verts[far] = (trial, ft);
            }
        }
        rho *= 0.5;
        if rho < spec.tol {
            return Some(StopReason::Converged);
        }
        for i in 0..n {
            if dist(&verts[i].0, &best.0) > 2.0 * rho {
                let mut x = best.0.clone();
                x[i] += rho;
                let fx = f(&x)?;
                verts[i] = (x, fx);
            }
        }
    }
}
