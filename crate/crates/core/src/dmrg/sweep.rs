use ndarray::{Array1, Array2, Array3, ArrayView3, ArrayView4};
use serde::{Deserialize, Serialize};

use super::env::{apply_one_site, apply_two_site, boundary, extend_left, extend_right, Env};
use super::mpo::{build_mpo, MpoOperator};
use super::mps::{init_mps, InitKind, MatrixProductState};
use crate::budget::{Budget, BudgetMeter};
use crate::error::{Error, Result};
use crate::hamiltonian::SpinChainSpec;
use crate::linalg::{lowest_eigenpair, svd, LanczosOptions};

/// Restart cap for the local eigensolver; the stage tolerance usually
/// stops it much earlier.
const LOCAL_MAX_RESTARTS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DmrgMethod {
    Dmrg1,
    Dmrg2,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DmrgStage {
    pub method: DmrgMethod,
    /// Max bond per sweep; the last entry repeats.
    pub bond_schedule: Vec<usize>,
    /// Relative squared-Schmidt-weight threshold.
    pub cutoff: f64,
    pub eig_tol: f64,
    pub max_sweeps: usize,
    pub ncv: usize,
    pub init: InitKind,
    /// Bond the initial state is padded to; ignored for `inherit`.
    #[serde(default = "one")]
    pub init_bond: usize,
}

impl DmrgStage {
    pub fn validate(&self) -> Result<()> {
        if self.bond_schedule.is_empty() || self.bond_schedule.contains(&0) {
            return Err(Error::invalid("bond schedule must be non-empty with entries >= 1"));
        }
        if !(0.0..1.0).contains(&self.cutoff) {
            return Err(Error::invalid("cutoff must lie in [0, 1)"));
        }
        if !(self.eig_tol > 0.0 && self.eig_tol.is_finite()) {
            return Err(Error::invalid("eig_tol must be > 0"));
        }
        if self.max_sweeps == 0 {
            return Err(Error::invalid("max_sweeps must be >= 1"));
        }
        if self.ncv < 2 {
            return Err(Error::invalid("ncv must be >= 2"));
        }
        if self.init_bond == 0 {
            return Err(Error::invalid("init_bond must be >= 1"));
        }
        Ok(())
    }

    pub fn bond_for_sweep(&self, sweep: usize) -> usize {
        self.bond_schedule[sweep.min(self.bond_schedule.len() - 1)]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DmrgProtocol {
    pub stages: Vec<DmrgStage>,
}

impl DmrgProtocol {
    pub fn validate(&self) -> Result<()> {
        let first = self.stages.first().ok_or_else(|| Error::invalid("protocol has no stages"))?;
        if first.init == InitKind::Inherit {
            return Err(Error::invalid("first stage cannot inherit"));
        }
        self.stages.iter().try_for_each(DmrgStage::validate)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub stage: usize,
    pub sweep: usize,
    pub bond_limit: usize,
    pub max_bond: usize,
    pub energy: f64,
    /// Largest discarded weight of any truncation in the sweep.
    pub max_discarded: f64,
}

#[derive(Debug, Clone)]
pub struct DmrgOutcome {
    /// Last state at a completed sweep boundary, center at site 0.
    pub state: MatrixProductState,
    /// `<psi|H|psi>` of `state`.
    pub energy: f64,
    pub trace: Vec<SweepRecord>,
    pub completed_sweeps: usize,
    pub local_updates: u64,
    pub budget_exhausted: bool,
}

/// Runs the staged protocol. One budget quantum is one local update.
pub fn run_dmrg(spec: &SpinChainSpec, protocol: &DmrgProtocol, budget: Budget) -> Result<DmrgOutcome> {
    budget.validate()?;
    if budget.is_zero() {
        return Err(Error::BudgetZero);
    }
    protocol.validate()?;
    let mpo = build_mpo(spec)?;
    run_dmrg_mpo(&mpo, protocol, budget)
}

pub(crate) fn run_dmrg_mpo(mpo: &MpoOperator, protocol: &DmrgProtocol, budget: Budget) -> Result<DmrgOutcome> {
    protocol.validate()?;
    let l = mpo.len();
    if l < 2 {
        return Err(Error::invalid("DMRG needs at least two sites"));
    }
    let mut meter = budget.start();
    let mut trace = Vec::new();
    let mut completed = 0usize;
    let mut snapshot: Option<MatrixProductState> = None;
    let mut exhausted = false;

    'stages: for (si, stage) in protocol.stages.iter().enumerate() {
        let start = match (stage.init, &snapshot) {
            (InitKind::Inherit, Some(prev)) => prev.clone(),
            (InitKind::Inherit, None) => return Err(Error::invalid("inherit stage has no completed state")),
            (kind, _) => init_mps(kind, l, stage.init_bond)?,
        };
        let mut sweeper = Sweeper::new(mpo, start, stage)?;
        for sweep in 0..stage.max_sweeps {
            let bond = stage.bond_for_sweep(sweep);
            match sweeper.sweep(bond, &mut meter)? {
                Some(max_discarded) => {
                    let energy = sweeper.center_energy();
                    trace.push(SweepRecord {
                        stage: si,
                        sweep,
                        bond_limit: bond,
                        max_bond: sweeper.mps.max_bond(),
                        energy,
                        max_discarded,
                    });
                    completed += 1;
                    snapshot = Some(sweeper.mps.clone());
                }
                None => {
                    exhausted = true;
                    break 'stages;
                }
            }
        }
    }
    let mut state = match snapshot {
        Some(s) => s,
        None => init_mps(protocol.stages[0].init, l, protocol.stages[0].init_bond)?,
    };
    if state.canonical_center() != Some(0) {
        state.canonicalize(0)?;
    }
    state.normalize();
    let energy = mpo.expectation(&state)?;
    Ok(DmrgOutcome {
        state,
        energy,
        trace,
        completed_sweeps: completed,
        local_updates: meter.used(),
        budget_exhausted: exhausted,
    })
}

struct Sweeper<'a> {
    mpo: &'a MpoOperator,
    mps: MatrixProductState,
    stage: &'a DmrgStage,
    /// `left[i]` covers sites `< i`.
    left: Vec<Env>,
    /// `right[i]` covers sites `>= i`.
    right: Vec<Env>,
    updates: u64,
}

impl<'a> Sweeper<'a> {
    fn new(mpo: &'a MpoOperator, mut mps: MatrixProductState, stage: &'a DmrgStage) -> Result<Self> {
        let l = mpo.len();
        if mps.len() != l {
            return Err(Error::DimensionMismatch { expected: l, got: mps.len() });
        }
        if mps.canonical_center() != Some(0) {
            mps.canonicalize(0)?;
        }
        mps.normalize();
        let mut s = Self { mpo, mps, stage, left: vec![Vec::new(); l + 1], right: vec![Vec::new(); l + 1], updates: 0 };
        s.rebuild_right();
        Ok(s)
    }

    fn rebuild_right(&mut self) {
        let l = self.mpo.len();
        self.left[0] = boundary();
        self.right[l] = boundary();
        for i in (1..l).rev() {
            self.right[i] = extend_right(&self.right[i + 1], &self.mps.tensors()[i], self.mpo.entries(i), self.mpo.left_dim(i));
        }
    }

    fn lanczos(&self, n: usize) -> LanczosOptions {
        LanczosOptions {
            krylov_dim: self.stage.ncv.min(n).max(2),
            tol: self.stage.eig_tol,
            max_restarts: LOCAL_MAX_RESTARTS,
            seed: 0x5eed ^ self.updates,
        }
    }

    fn center_energy(&self) -> f64 {
        let theta = &self.mps.tensors()[0];
        let h = apply_one_site(&self.left[0], &self.right[1], self.mpo.entries(0), theta.view());
        let num: f64 = theta.iter().zip(h.iter()).map(|(a, b)| a * b).sum();
        let den: f64 = theta.iter().map(|a| a * a).sum();
        num / den
    }

    /// One left-to-right plus right-to-left pass. Returns `None` when the
    /// budget runs out mid-sweep, otherwise the largest discarded weight.
    fn sweep(&mut self, bond: usize, meter: &mut BudgetMeter) -> Result<Option<f64>> {
        match self.stage.method {
            DmrgMethod::Dmrg2 => self.sweep_two_site(bond, meter),
            DmrgMethod::Dmrg1 => self.sweep_one_site(bond, meter),
        }
    }

    fn sweep_two_site(&mut self, bond: usize, meter: &mut BudgetMeter) -> Result<Option<f64>> {
        let l = self.mpo.len();
        let mut worst: f64 = 0.0;
        for i in 0..l - 1 {
            if !meter.try_consume(1) {
                return Ok(None);
            }
            worst = worst.max(self.update_pair(i, bond, true)?);
        }
        for i in (0..l - 1).rev() {
            if !meter.try_consume(1) {
                return Ok(None);
            }
            worst = worst.max(self.update_pair(i, bond, false)?);
        }
        self.mps.set_center(Some(0));
        Ok(Some(worst))
    }

    fn update_pair(&mut self, i: usize, bond: usize, moving_right: bool) -> Result<f64> {
        self.updates += 1;
        let (a, b) = (&self.mps.tensors()[i], &self.mps.tensors()[i + 1]);
        let (dl, _, dm) = a.dim();
        let (_, _, dr) = b.dim();
        let am = a.view().into_shape_with_order((2 * dl, dm)).unwrap();
        let bm = b.view().into_shape_with_order((dm, 2 * dr)).unwrap();
        let theta = am.dot(&bm).into_shape_with_order(2 * dl * 2 * dr).unwrap();
        let shape = (dl, 2, 2, dr);
        let (lenv, renv) = (&self.left[i], &self.right[i + 2]);
        let (w1, w2) = (self.mpo.entries(i), self.mpo.entries(i + 1));
        let mid = self.mpo.right_dim(i);
        let matvec = |v: &Array1<f64>| -> Array1<f64> {
            let t = ArrayView4::from_shape(shape, v.as_slice().unwrap()).unwrap();
            let out = apply_two_site(lenv, renv, w1, w2, mid, t);
            Array1::from_shape_vec(out.len(), out.into_raw_vec_and_offset().0).unwrap()
        };
        let n = theta.len();
        let pair = lowest_eigenpair(matvec, theta, self.lanczos(n))?;
        let m = pair.vector.into_shape_with_order((2 * dl, 2 * dr)).unwrap();
        let (u, s, vt, discarded) = truncate(&m, self.stage.cutoff, bond)?;
        let k = s.len();
        let tensors = self.mps.tensors_mut();
        if moving_right {
            let sv = Array2::from_diag(&s).dot(&vt);
            tensors[i] = u.into_shape_with_order((dl, 2, k)).unwrap();
            tensors[i + 1] = sv.into_shape_with_order((k, 2, dr)).unwrap();
            self.left[i + 1] = extend_left(&self.left[i], &self.mps.tensors()[i], self.mpo.entries(i), self.mpo.right_dim(i));
        } else {
            let us = &u * &s.view().insert_axis(ndarray::Axis(0));
            tensors[i] = us.into_shape_with_order((dl, 2, k)).unwrap();
            tensors[i + 1] = vt.into_shape_with_order((k, 2, dr)).unwrap();
            self.right[i + 1] =
                extend_right(&self.right[i + 2], &self.mps.tensors()[i + 1], self.mpo.entries(i + 1), self.mpo.left_dim(i + 1));
        }
        Ok(discarded)
    }

    fn sweep_one_site(&mut self, bond: usize, meter: &mut BudgetMeter) -> Result<Option<f64>> {
        let l = self.mpo.len();
        if self.mps.max_bond() < bond && self.mps.bond_dims().iter().enumerate().any(|(b, &d)| d < bond.min(super::mps::bond_cap(l, b))) {
            self.mps.pad_bonds(bond);
            self.mps.canonicalize(0)?;
            self.rebuild_right();
        }
        for i in 0..l - 1 {
            if !meter.try_consume(1) {
                return Ok(None);
            }
            self.update_site(i)?;
            self.mps.shift_right(i)?;
            self.left[i + 1] = extend_left(&self.left[i], &self.mps.tensors()[i], self.mpo.entries(i), self.mpo.right_dim(i));
        }
        for i in (1..l).rev() {
            if !meter.try_consume(1) {
                return Ok(None);
            }
            self.update_site(i)?;
            self.mps.shift_left(i)?;
            self.right[i] = extend_right(&self.right[i + 1], &self.mps.tensors()[i], self.mpo.entries(i), self.mpo.left_dim(i));
        }
        if !meter.try_consume(1) {
            return Ok(None);
        }
        self.update_site(0)?;
        self.mps.set_center(Some(0));
        Ok(Some(0.0))
    }

    fn update_site(&mut self, i: usize) -> Result<()> {
        self.updates += 1;
        let a = &self.mps.tensors()[i];
        let shape = a.dim();
        let start = Array1::from_iter(a.iter().copied());
        let (lenv, renv, w) = (&self.left[i], &self.right[i + 1], self.mpo.entries(i));
        let matvec = |v: &Array1<f64>| -> Array1<f64> {
            let t = ArrayView3::from_shape(shape, v.as_slice().unwrap()).unwrap();
            let out = apply_one_site(lenv, renv, w, t);
            Array1::from_shape_vec(out.len(), out.into_raw_vec_and_offset().0).unwrap()
        };
        let n = start.len();
        let pair = lowest_eigenpair(matvec, start, self.lanczos(n))?;
        let norm = pair.vector.iter().map(|x| x * x).sum::<f64>().sqrt();
        let t: Array3<f64> = pair.vector.into_shape_with_order(shape).unwrap().mapv(|x| x / norm);
        self.mps.tensors_mut()[i] = t;
        self.mps.set_center(Some(i));
        Ok(())
    }
}

/// SVD with relative squared-weight cutoff and bond cap; kept singular
/// values are renormalized. Returns the discarded weight fraction.
pub(crate) fn truncate(m: &Array2<f64>, cutoff: f64, max_bond: usize) -> Result<(Array2<f64>, Array1<f64>, Array2<f64>, f64)> {
    let (u, s, vt) = svd(m)?;
    let total: f64 = s.iter().map(|x| x * x).sum();
    let keep_cut = s.iter().take_while(|x| *x * *x >= cutoff * total).count();
    let k = keep_cut.min(max_bond).max(1);
    let kept: f64 = s.iter().take(k).map(|x| x * x).sum();
    let scale = if kept > 0.0 { kept.sqrt() } else { 1.0 };
    let s_kept = s.slice(ndarray::s![..k]).mapv(|x| x / scale);
    let discarded = if total > 0.0 { 1.0 - kept / total } else { 0.0 };
    Ok((
        u.slice(ndarray::s![.., ..k]).to_owned(),
        s_kept,
        vt.slice(ndarray::s![..k, ..]).to_owned(),
        discarded.max(0.0),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{build_spin_chain, exact_ground};

    fn stage(method: DmrgMethod, bonds: Vec<usize>, sweeps: usize, init: InitKind) -> DmrgStage {
        DmrgStage { method, bond_schedule: bonds, cutoff: 1e-12, eig_tol: 1e-10, max_sweeps: sweeps, ncv: 8, init, init_bond: 1 }
    }

    #[test]
    fn truncation_respects_cutoff_and_cap() {
        let m = Array2::from_diag(&ndarray::array![1.0, 0.1, 1e-4, 1e-8]);
        // squared weights 1, 1e-2, 1e-8, 1e-16
        let (_, s, _, d) = truncate(&m, 1e-6, 10).unwrap();
        assert_eq!(s.len(), 2);
        assert!((d - 1e-8 / 1.01).abs() < 1e-12);
        let (_, s, _, _) = truncate(&m, 0.0, 2).unwrap();
        assert_eq!(s.len(), 2);
        assert!((s.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn dmrg2_small_chain_matches_exact() {
        let spec = SpinChainSpec::heisenberg_xxx(8);
        let p = DmrgProtocol { stages: vec![stage(DmrgMethod::Dmrg2, vec![16], 6, InitKind::Neel)] };
        let out = run_dmrg(&spec, &p, Budget::quanta(1_000_000)).unwrap();
        let (e0, _) = exact_ground(&build_spin_chain(&spec).unwrap()).unwrap();
        assert!((out.energy - e0).abs() < 1e-9, "{} vs {e0}", out.energy);
        assert!(out.state.isometry_error() < 1e-10);
        for w in out.trace.windows(2) {
            assert!(w[1].energy <= w[0].energy + 1e-10);
        }
    }

    #[test]
    fn dmrg1_with_padding_converges() {
        let spec = SpinChainSpec::critical_tfim(8);
        let mut s = stage(DmrgMethod::Dmrg1, vec![16], 10, InitKind::Random { seed: 5 });
        s.init_bond = 16;
        let p = DmrgProtocol { stages: vec![s] };
        let out = run_dmrg(&spec, &p, Budget::quanta(1_000_000)).unwrap();
        let (e0, _) = exact_ground(&build_spin_chain(&spec).unwrap()).unwrap();
        assert!((out.energy - e0).abs() < 1e-8, "{} vs {e0}", out.energy);
    }

    #[test]
    fn budget_stops_at_sweep_boundary() {
        let spec = SpinChainSpec::heisenberg_xxx(6);
        let p = DmrgProtocol { stages: vec![stage(DmrgMethod::Dmrg2, vec![4, 8], 5, InitKind::Neel)] };
        // one sweep is 10 updates
        let out = run_dmrg(&spec, &p, Budget::quanta(25)).unwrap();
        assert_eq!(out.completed_sweeps, 2);
        assert!(out.budget_exhausted);
        assert_eq!(out.trace.len(), 2);
        assert!((out.energy - out.trace[1].energy).abs() < 1e-10);
        assert!(matches!(run_dmrg(&spec, &p, Budget::quanta(0)), Err(Error::BudgetZero)));
    }

    #[test]
    fn protocol_validation() {
        let mut p = DmrgProtocol { stages: vec![stage(DmrgMethod::Dmrg2, vec![4], 1, InitKind::Inherit)] };
        assert!(p.validate().is_err());
        p.stages[0].init = InitKind::Neel;
        assert!(p.validate().is_ok());
        p.stages[0].cutoff = 1.0;
        assert!(p.validate().is_err());
        p.stages[0].cutoff = 0.0;
        p.stages[0].ncv = 1;
        assert!(p.validate().is_err());
    }
}
