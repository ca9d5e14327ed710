use ndarray::Array1;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::factor::HsFactorization;
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::linalg::eigh_complex;
use crate::parallel;
use crate::C64;

/// Penalty weight on the block-energy spread in [`live_score`].
pub const DEFAULT_LAMBDA: f64 = 5.0;
const ORTHOGONAL_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialKind {
    /// Basis state with the lowest diagonal entry.
    DiagonalGround,
    Uniform,
    /// Lowest eigenvector of the dense source matrix.
    Exact,
    /// Real amplitudes, normalized on use.
    Custom(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectorConfig {
    pub walkers_per_rank: usize,
    pub num_ranks: usize,
    pub steps_per_block: usize,
    pub num_blocks: usize,
    pub timestep: f64,
    pub field_cutoff: f64,
    pub stabilize_freq: usize,
    pub pop_control_freq: usize,
    pub trial: TrialKind,
    pub seed: u64,
}

impl ProjectorConfig {
    pub fn total_walkers(&self) -> usize {
        self.walkers_per_rank * self.num_ranks
    }

    pub fn validate(&self) -> Result<()> {
        let ints = [
            ("walkers_per_rank", self.walkers_per_rank),
            ("num_ranks", self.num_ranks),
            ("steps_per_block", self.steps_per_block),
            ("num_blocks", self.num_blocks),
            ("stabilize_freq", self.stabilize_freq),
            ("pop_control_freq", self.pop_control_freq),
        ];
        for (name, v) in ints {
            if v == 0 {
                return Err(Error::invalid(format!("{name} must be positive")));
            }
        }
        if !(self.timestep > 0.0) || !self.timestep.is_finite() {
            return Err(Error::invalid("timestep must be positive and finite"));
        }
        if !(self.field_cutoff >= 0.0) || !self.field_cutoff.is_finite() {
            return Err(Error::invalid("field_cutoff must be >= 0"));
        }
        if let TrialKind::Custom(v) = &self.trial {
            if v.iter().any(|a| !a.is_finite()) {
                return Err(Error::invalid("custom trial has non-finite amplitudes"));
            }
        }
        Ok(())
    }
}

/// Walker-steps of one run: total walkers times steps per block times blocks.
pub fn stochastic_cost(config: &ProjectorConfig) -> u64 {
    (config.total_walkers() as u64) * (config.steps_per_block as u64) * (config.num_blocks as u64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct WalkerEnsemble {
    pub states: Vec<Vec<C64>>,
    pub weights: Vec<f64>,
}

impl WalkerEnsemble {
    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Systematic resampling with one uniform offset `u` in `[0, 1)`.
    /// Every surviving walker gets the mean weight, so the total is kept.
    pub fn comb_resample(&mut self, u: f64) {
        let n = self.weights.len();
        let total = self.total_weight();
        let mean = total / n as f64;
        let mut picks = Vec::with_capacity(n);
        let mut cum = 0.0;
        let mut j = 0;
        for k in 0..n {
            let tooth = (u + k as f64) * mean;
            while j + 1 < n && cum + self.weights[j] <= tooth {
                cum += self.weights[j];
                j += 1;
            }
            picks.push(j);
        }
        self.states = picks.iter().map(|&i| self.states[i].clone()).collect();
        self.weights = vec![mean; n];
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub block_energies: Vec<f64>,
    pub pe_mean: f64,
    pub pe_std: f64,
    pub live_score: f64,
    pub lambda: f64,
    /// Ensemble weight at each block end, before the per-block rescale.
    pub total_weight_history: Vec<f64>,
    pub stochastic_cost: u64,
    /// Blocks the budget allowed out of the configured count.
    pub completed_blocks: usize,
}

impl RunTrace {
    pub fn rescore(&mut self, lambda: f64) -> Result<()> {
        let (mean, std) = pe_stats(&self.block_energies)?;
        self.pe_mean = mean;
        self.pe_std = std;
        self.live_score = mean + lambda * std;
        self.lambda = lambda;
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("block_index,energy,total_weight\n");
        for (i, (e, w)) in self.block_energies.iter().zip(&self.total_weight_history).enumerate() {
            out.push_str(&format!("{i},{},{}\n", crate::io::fmt_real(*e), crate::io::fmt_real(*w)));
        }
        out
    }

    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "pe_mean": self.pe_mean,
            "pe_std": self.pe_std,
            "live_score": self.live_score,
            "lambda": self.lambda,
            "stochastic_cost": self.stochastic_cost,
        })
    }
}

/// Mean and sample standard deviation of the final `ceil(n / 2)` blocks.
pub fn pe_stats(block_energies: &[f64]) -> Result<(f64, f64)> {
    let n = block_energies.len();
    if n < 2 {
        return Err(Error::BudgetTooSmall(format!("{n} block(s) recorded, need at least 2")));
    }
    let tail = &block_energies[n - n.div_ceil(2)..];
    let k = tail.len() as f64;
    let mean = tail.iter().sum::<f64>() / k;
    let std = if tail.len() > 1 {
        (tail.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok((mean, std))
}

/// `mean + lambda * std` over the production half of the blocks.
pub fn live_score(block_energies: &[f64], lambda: f64) -> Result<f64> {
    let (mean, std) = pe_stats(block_energies)?;
    Ok(mean + lambda * std)
}

fn trial_state(fact: &HsFactorization, kind: &TrialKind) -> Result<Vec<C64>> {
    let dim = fact.dim;
    let raw: Vec<C64> = match kind {
        TrialKind::DiagonalGround => {
            let k = (0..dim).fold(0, |best, i| if fact.one_body[i] < fact.one_body[best] { i } else { best });
            (0..dim).map(|i| C64::new(if i == k { 1.0 } else { 0.0 }, 0.0)).collect()
        }
        TrialKind::Uniform => vec![C64::new(1.0, 0.0); dim],
        TrialKind::Exact => {
            let (_, vecs) = eigh_complex(fact.source())?;
            vecs.column(0).to_vec()
        }
        TrialKind::Custom(v) => {
            if v.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: v.len() });
            }
            v.iter().map(|&a| C64::new(a, 0.0)).collect()
        }
    };
    let norm = raw.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if !(norm > 0.0) {
        return Err(Error::invalid("trial state has zero norm"));
    }
    Ok(raw.into_iter().map(|a| a / norm).collect())
}

struct Slot {
    state: Vec<C64>,
    rng: ChaCha8Rng,
}

fn dot(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

/// Runs the walker projection and returns the block trace scored with
/// [`DEFAULT_LAMBDA`]; callers rescore with their own penalty.
///
/// Quanta are walker-steps and are claimed one block at a time, so a run
/// always stops on a block boundary.
pub fn run_projector(fact: &HsFactorization, config: &ProjectorConfig, budget: Budget) -> Result<RunTrace> {
    config.validate()?;
    budget.validate()?;
    if budget.is_zero() {
        return Err(Error::BudgetZero);
    }
    let trial = trial_state(fact, &config.trial)?;
    let h_trial: Array1<C64> = fact.source().t().mapv(|z| z.conj()).dot(&Array1::from(trial.clone()));
    let h_trial = h_trial.to_vec();

    let nw = config.total_walkers();
    let mut slots: Vec<Slot> = (0..nw)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(i as u64);
            Slot { state: trial.clone(), rng }
        })
        .collect();
    let mut weights = vec![1.0; nw];
    let mut control = ChaCha8Rng::seed_from_u64(config.seed);
    control.set_stream(u64::MAX);

    let dt = config.timestep;
    let mut meter = budget.start();
    let block_cost = (nw as u64) * (config.steps_per_block as u64);
    let mut energies = Vec::new();
    let mut history = Vec::new();
    let mut step = 0usize;

    for _block in 0..config.num_blocks {
        if !meter.try_consume(block_cost) {
            break;
        }
        for _ in 0..config.steps_per_block {
            step += 1;
            parallel::for_each_mut(&mut slots, |_, slot| {
                let x = fact.draw_fields(&mut slot.rng);
                fact.propagate(&mut slot.state, dt, &x);
            });
            if step % config.stabilize_freq == 0 {
                for (slot, w) in slots.iter_mut().zip(weights.iter_mut()) {
                    let norm = slot.state.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
                    if !(norm > 0.0) || !norm.is_finite() {
                        return Err(Error::Evaluation("walker norm collapsed or overflowed".into()));
                    }
                    slot.state.iter_mut().for_each(|a| *a /= norm);
                    *w *= norm;
                }
            }
            if weights.iter().any(|w| !w.is_finite()) {
                return Err(Error::Evaluation("walker weight overflow".into()));
            }
            if step % config.pop_control_freq == 0 {
                let mut ens = WalkerEnsemble {
                    states: slots.iter_mut().map(|s| std::mem::take(&mut s.state)).collect(),
                    weights: std::mem::take(&mut weights),
                };
                ens.comb_resample(control.random::<f64>());
                for (slot, st) in slots.iter_mut().zip(ens.states) {
                    slot.state = st;
                }
                weights = ens.weights;
            }
        }

        let mut num = C64::new(0.0, 0.0);
        let mut den = C64::new(0.0, 0.0);
        for (slot, &w) in slots.iter().zip(&weights) {
            num += dot(&h_trial, &slot.state) * w;
            den += dot(&trial, &slot.state) * w;
        }
        let total: f64 = weights.iter().sum();
        if !total.is_finite() || total <= 0.0 {
            return Err(Error::Evaluation("walker weight overflow".into()));
        }
        if den.norm() < ORTHOGONAL_TOL * total {
            return Err(Error::Evaluation("trial state is orthogonal to the walker ensemble".into()));
        }
        energies.push((num / den).re);
        history.push(total);
        let mean = total / nw as f64;
        weights.iter_mut().for_each(|w| *w /= mean);
    }

    let (pe_mean, pe_std) = pe_stats(&energies)?;
    Ok(RunTrace {
        completed_blocks: energies.len(),
        block_energies: energies,
        pe_mean,
        pe_std,
        live_score: pe_mean + DEFAULT_LAMBDA * pe_std,
        lambda: DEFAULT_LAMBDA,
        total_weight_history: history,
        stochastic_cost: stochastic_cost(config),
    })
}
