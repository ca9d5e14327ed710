use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::ansatz::{AnsatzSpec, Circuit, InitPolicy};
use super::optimize::{minimize, OptimizerSpec, StopReason};
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::hamiltonian::PauliHamiltonian;
use crate::io::fmt_real;
use crate::C64;

/// Rayleigh quotient `<psi|H|psi> / <psi|psi>`.
pub fn energy(h: &PauliHamiltonian, state: &[C64]) -> Result<f64> {
    let norm: f64 = state.iter().map(|a| a.norm_sqr()).sum();
    if !(norm > 0.0) {
        return Err(Error::invalid("energy of a zero vector"));
    }
    Ok(h.quadratic_form(state)? / norm)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VqeProtocol {
    pub ansatz: AnsatzSpec,
    pub optimizer: OptimizerSpec,
}

impl VqeProtocol {
    pub fn validate(&self) -> Result<()> {
        self.ansatz.validate()?;
        self.optimizer.validate()
    }

    pub(crate) fn initial_params(&self) -> Vec<f64> {
        let p = self.ansatz.num_params();
        match &self.ansatz.init {
            InitPolicy::Zeros => vec![0.0; p],
            InitPolicy::WarmStart(v) => v.clone(),
            InitPolicy::Gaussian { scale } => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.ansatz.seed);
                let normal = Normal::new(0.0, *scale).expect("scale validated");
                (0..p).map(|_| normal.sample(&mut rng)).collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VqeResult {
    pub best_params: Vec<f64>,
    pub best_energy: f64,
    pub delta_e: Option<f64>,
    /// `(evaluation index, energy)`; index 0 is the initial point.
    pub evaluation_trace: Vec<(u64, f64)>,
    pub evaluations_used: u64,
    pub stop: StopReason,
}

/// Runs one fixed-budget optimization. One quantum is one objective
/// evaluation after the initial point, which is always evaluated.
pub fn run_vqe(
    h: &PauliHamiltonian,
    protocol: &VqeProtocol,
    budget: Budget,
    reference_energy: Option<f64>,
) -> Result<VqeResult> {
    budget.validate()?;
    protocol.validate()?;
    let n = protocol.ansatz.num_sites();
    if n != h.num_sites() {
        return Err(Error::DimensionMismatch { expected: h.num_sites(), got: n });
    }
    let circuit = Circuit::compile(&protocol.ansatz)?;
    let eval = |x: &[f64]| -> Result<f64> { energy(h, &circuit.prepare(x)?) };

    let x0 = protocol.initial_params();
    let f0 = eval(&x0)?;
    if !f0.is_finite() {
        return Err(Error::Evaluation("non-finite energy at initial parameters".into()));
    }
    let mut meter = budget.start();
    let mut trace = vec![(0u64, f0)];
    let mut best = (f0, x0.clone());
    let mut failure: Option<Error> = None;
    let max_steps = protocol.optimizer.max_steps;

    let stop = {
        let mut objective = |x: &[f64]| -> Option<f64> {
            if failure.is_some() || (trace.len() as u64) > max_steps || !meter.try_consume(1) {
                return None;
            }
            match eval(x) {
                Ok(e) if e.is_finite() => {
                    trace.push((trace.len() as u64, e));
                    if e < best.0 {
                        best = (e, x.to_vec());
                    }
                    Some(e)
                }
                Ok(_) => {
                    failure = Some(Error::Evaluation("non-finite energy".into()));
                    None
                }
                Err(e) => {
                    failure = Some(e);
                    None
                }
            }
        };
        minimize(&protocol.optimizer, &x0, f0, &mut objective)
    };
    if let Some(e) = failure {
        return Err(e);
    }
    let delta_e = reference_energy.map(|r| (best.0 - r).abs());
    Ok(VqeResult {
        best_params: best.1,
        best_energy: best.0,
        delta_e,
        evaluations_used: trace.len() as u64,
        evaluation_trace: trace,
        stop,
    })
}

/// CSV with header `eval_index,energy`.
pub fn trace_to_csv(trace: &[(u64, f64)]) -> String {
    let mut out = String::from("eval_index,energy\n");
    for (i, e) in trace {
        let _ = writeln!(out, "{i},{}", fmt_real(*e));
    }
    out
}
