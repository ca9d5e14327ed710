use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::budget::{Budget, WALL_TIME_GRACE};
use crate::dmrg::{run_dmrg, DmrgProtocol};
use crate::error::{Error, Result};
use crate::hamiltonian::{build_spin_chain, exact_ground, PauliHamiltonian, SpinChainSpec, EXACT_CAP};
use crate::projector::{factorize, run_projector, ProjectorConfig};
use crate::vqe::{run_vqe, VqeProtocol};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Vqe,
    Dmrg,
    Projector,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Vqe => "vqe",
            Family::Dmrg => "dmrg",
            Family::Projector => "projector",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "payload", rename_all = "snake_case")]
pub enum Payload {
    Vqe(VqeProtocol),
    Dmrg(DmrgProtocol),
    Projector(ProjectorConfig),
}

impl Payload {
    pub fn family(&self) -> Family {
        match self {
            Payload::Vqe(_) => Family::Vqe,
            Payload::Dmrg(_) => Family::Dmrg,
            Payload::Projector(_) => Family::Projector,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Payload::Vqe(p) => p.validate(),
            Payload::Dmrg(p) => p.validate(),
            Payload::Projector(p) => p.validate(),
        }
    }
}

/// A candidate configuration for one solver family on one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Protocol {
    #[serde(flatten)]
    pub payload: Payload,
    pub problem_ref: String,
    #[serde(default)]
    pub label: String,
}

impl Protocol {
    pub fn new(payload: Payload, problem_ref: impl Into<String>, label: impl Into<String>) -> Self {
        Self { payload, problem_ref: problem_ref.into(), label: label.into() }
    }

    pub fn family(&self) -> Family {
        self.payload.family()
    }
}

/// A benchmark instance with its reference energy resolved once up front.
#[derive(Debug, Clone)]
pub struct Problem {
    name: String,
    chain: Option<SpinChainSpec>,
    /// Absent for chains too long for a statevector; only DMRG applies.
    hamiltonian: Option<PauliHamiltonian>,
    reference_energy: Option<f64>,
}

impl Problem {
    pub fn chain(spec: SpinChainSpec) -> Result<Self> {
        spec.validate()?;
        let [jx, jy, jz, hx, hz] = spec.couplings();
        let name = format!("chain:L={},jx={jx},jy={jy},jz={jz},hx={hx},hz={hz}", spec.l);
        let mut p = match build_spin_chain(&spec) {
            Ok(h) => Self::hamiltonian(name, h)?,
            Err(Error::SizeOverCap { .. }) => Self { name, chain: None, hamiltonian: None, reference_energy: None },
            Err(e) => return Err(e),
        };
        p.chain = Some(spec);
        Ok(p)
    }

    /// Any Pauli Hamiltonian; the reference is exact when small enough.
    pub fn hamiltonian(name: impl Into<String>, h: PauliHamiltonian) -> Result<Self> {
        let reference_energy = if h.num_sites() <= EXACT_CAP { Some(exact_ground(&h)?.0) } else { None };
        Ok(Self { name: name.into(), chain: None, hamiltonian: Some(h), reference_energy })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn hamiltonian_ref(&self) -> Result<&PauliHamiltonian> {
        self.hamiltonian.as_ref().ok_or_else(|| Error::invalid(format!("{} is too long for a statevector Hamiltonian", self.name)))
    }

    pub fn chain_spec(&self) -> Option<&SpinChainSpec> {
        self.chain.as_ref()
    }

    pub fn reference_energy(&self) -> Option<f64> {
        self.reference_energy
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreOutcome {
    /// Absent when the evaluation failed.
    pub score: Option<f64>,
    pub summary: String,
    pub elapsed_s: f64,
}

/// Scores `protocol` under `budget`. Lower is better. Errors and panics in
/// the solver become a failed outcome instead of propagating.
pub fn score_candidate(problem: &Problem, protocol: &Protocol, budget: Budget, lambda: f64) -> ScoreOutcome {
    let start = Instant::now();
    let result = catch_unwind(AssertUnwindSafe(|| evaluate(problem, &protocol.payload, budget, lambda)));
    let elapsed = start.elapsed().as_secs_f64();
    let elapsed_s = if budget.is_quanta() { 0.0 } else { elapsed };
    let (score, summary) = match result {
        Ok(Ok((s, summary))) => match budget {
            Budget::WallTime(limit) if elapsed > limit * (1.0 + WALL_TIME_GRACE) => {
                (None, format!("abandoned: {elapsed:.2} s exceeds the {limit} s budget"))
            }
            _ => (Some(s), summary),
        },
        Ok(Err(e)) => (None, format!("failed: {e}")),
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            (None, format!("crashed: {msg}"))
        }
    };
    ScoreOutcome { score, summary, elapsed_s }
}

fn evaluate(problem: &Problem, payload: &Payload, budget: Budget, lambda: f64) -> Result<(f64, String)> {
    payload.validate()?;
    match payload {
        Payload::Vqe(p) => {
            let r = run_vqe(problem.hamiltonian_ref()?, p, budget, problem.reference_energy)?;
            let gap = r.delta_e.map(|d| format!(", |dE| {d:.3e}")).unwrap_or_default();
            let summary = format!("energy {:.10}{gap}, {} evaluations", r.best_energy, r.evaluations_used);
            Ok((r.best_energy, summary))
        }
        Payload::Dmrg(p) => {
            let spec = problem.chain.as_ref().ok_or_else(|| Error::invalid("dmrg needs a spin-chain problem"))?;
            let out = run_dmrg(spec, p, budget)?;
            let summary = format!(
                "energy {:.10}, {} sweeps, max bond {}",
                out.energy,
                out.completed_sweeps,
                out.state.max_bond()
            );
            Ok((out.energy, summary))
        }
        Payload::Projector(c) => {
            let fact = factorize(&problem.hamiltonian_ref()?.to_dense(), c.field_cutoff)?;
            let mut trace = run_projector(&fact, c, budget)?;
            trace.rescore(lambda)?;
            let summary = format!(
                "pe_mean {:.8}, pe_std {:.3e}, {} blocks",
                trace.pe_mean, trace.pe_std, trace.completed_blocks
            );
            Ok((trace.live_score, summary))
        }
    }
}

/// Percent improvement of `score` over `prev`, positive when lower.
/// Undefined (None) for a zero or non-finite previous score.
pub fn relative_gain(prev: f64, score: f64) -> Option<f64> {
    if prev == 0.0 || !prev.is_finite() || !score.is_finite() {
        return None;
    }
    Some(100.0 * (prev - score) / prev.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn relative_gain_examples() {
        assert!((relative_gain(9.932e-3, 2.4e-4).unwrap() - 97.58).abs() < 0.005);
        assert!((relative_gain(-1.121930, -1.122448).unwrap() - 0.0462).abs() < 0.005);
        assert_eq!(relative_gain(1.5, 1.5), Some(0.0));
        assert_eq!(relative_gain(0.0, 1.0), None);
    }

    #[test]
    fn dmrg_candidate_matches_exact() {
        let problem = Problem::chain(SpinChainSpec::heisenberg_xxx(10)).unwrap();
        let mut proto = presets::BenchChain::Xxx.best_protocol();
        proto.stages[0].bond_schedule = vec![8, 16, 32, 64];
        proto.stages[0].cutoff = 1e-12;
        proto.stages[0].eig_tol = 1e-12;
        proto.stages[0].max_sweeps = 8;
        let protocol = Protocol::new(Payload::Dmrg(proto), problem.name(), "");
        let out = score_candidate(&problem, &protocol, Budget::quanta(1 << 40), 5.0);
        let exact = problem.reference_energy().unwrap();
        assert!((out.score.unwrap() - exact).abs() < 1e-9, "{:?} vs {exact}", out.score);
    }

    #[test]
    fn failures_are_contained() {
        let problem = Problem::chain(SpinChainSpec::heisenberg_xxx(4)).unwrap();
        let mut cfg = presets::projector_baseline(0);
        cfg.timestep = -1.0;
        let protocol = Protocol::new(Payload::Projector(cfg), problem.name(), "");
        let out = score_candidate(&problem, &protocol, Budget::quanta(100), 5.0);
        assert_eq!(out.score, None);
        assert!(out.summary.starts_with("failed"));
    }

    #[test]
    fn zero_quanta_vqe_scores_initial_point() {
        let problem = Problem::chain(SpinChainSpec::heisenberg_xxx(4)).unwrap();
        let mut p = presets::vqe_pool_baseline(4, 1, 0);
        p.ansatz.init = crate::vqe::InitPolicy::Zeros;
        let protocol = Protocol::new(Payload::Vqe(p), problem.name(), "");
        let out = score_candidate(&problem, &protocol, Budget::quanta(0), 5.0);
        // Neel reference energy: three bonds of -1/4
        assert!((out.score.unwrap() + 0.75).abs() < 1e-12);
    }

    #[test]
    fn protocol_json_round_trip() {
        let p = Protocol::new(Payload::Dmrg(presets::dmrg_baseline(3)), "x", "baseline");
        let text = serde_json::to_string(&p).unwrap();
        assert!(text.contains("\"family\":\"dmrg\""));
        let back: Protocol = serde_json::from_str(&text).unwrap();
        assert_eq!(back, p);
    }
}
