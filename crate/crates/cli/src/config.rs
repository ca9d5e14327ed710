//! Campaign configuration files (TOML).

use std::path::{Path, PathBuf};

use gsbench::budget::Budget;
use gsbench::campaign::{Family, Lever, Payload, Problem, TiePolicy};
use gsbench::hamiltonian::{parse_hamiltonian_file, SpinChainSpec};
use gsbench::presets::BenchChain;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Which instance to run on. Exactly one of `chain`, `couplings` or
/// `hamiltonian_file` must be set; the first two need `length`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chain: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub couplings: Option<[f64; 5]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub length: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hamiltonian_file: Option<PathBuf>,
}

impl ProblemSpec {
    pub fn chain_spec(&self) -> Result<Option<SpinChainSpec>, CliError> {
        let set = [self.chain.is_some(), self.couplings.is_some(), self.hamiltonian_file.is_some()];
        if set.iter().filter(|s| **s).count() != 1 {
            return Err(CliError::Usage("give exactly one of chain, couplings or hamiltonian_file".into()));
        }
        if self.hamiltonian_file.is_some() {
            if self.length.is_some() {
                return Err(CliError::Usage("length does not apply to a hamiltonian file".into()));
            }
            return Ok(None);
        }
        let l = self.length.ok_or_else(|| CliError::Usage("length is required for a chain".into()))?;
        let spec = match (&self.chain, self.couplings) {
            (Some(name), _) => BenchChain::parse(name)
                .ok_or_else(|| CliError::Usage(format!("unknown chain {name:?} (xxx, xxz, tfim, xx)")))?
                .spec(l),
            (None, Some(c)) => SpinChainSpec::new(l, c),
            (None, None) => unreachable!("checked above"),
        };
        spec.validate()?;
        Ok(Some(spec))
    }

    /// Resolves paths relative to `base` (the config file's directory).
    pub fn resolve(&self, base: &Path) -> Result<Problem, CliError> {
        if let Some(spec) = self.chain_spec()? {
            return Ok(Problem::chain(spec)?);
        }
        let path = base.join(self.hamiltonian_file.as_ref().expect("checked in chain_spec"));
        let text = std::fs::read_to_string(&path).map_err(|e| CliError::Io(path.clone(), e))?;
        let h = parse_hamiltonian_file(&text)?;
        Ok(Problem::hamiltonian(path.display().to_string(), h)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ProposerSpec {
    Builtin {
        seed: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        levers: Option<Vec<Lever>>,
    },
    /// JSON-lines file of `{protocol, summary}` proposals.
    Scripted { path: PathBuf },
    /// Shell command speaking line-delimited JSON on stdin/stdout.
    External { command: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    family: Family,
    iterations: usize,
    budget: Budget,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lambda: Option<f64>,
    #[serde(default)]
    tie_policy: TiePolicy,
    #[serde(default)]
    seed: u64,
    output_dir: PathBuf,
    problem: ProblemSpec,
    proposer: ProposerSpec,
    baseline: toml::Value,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignConfig {
    pub family: Family,
    pub iterations: usize,
    pub budget: Budget,
    /// Only meaningful for projector campaigns.
    pub lambda: Option<f64>,
    pub tie_policy: TiePolicy,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub problem: ProblemSpec,
    pub proposer: ProposerSpec,
    pub baseline: Payload,
}

/// Decodes a family's protocol table.
pub fn payload_from_value(family: Family, value: toml::Value) -> Result<Payload, CliError> {
    let payload = match family {
        Family::Vqe => Payload::Vqe(value.try_into()?),
        Family::Dmrg => Payload::Dmrg(value.try_into()?),
        Family::Projector => Payload::Projector(value.try_into()?),
    };
    payload.validate()?;
    Ok(payload)
}

fn payload_to_value(payload: &Payload) -> Result<toml::Value, CliError> {
    Ok(match payload {
        Payload::Vqe(p) => toml::Value::try_from(p)?,
        Payload::Dmrg(p) => toml::Value::try_from(p)?,
        Payload::Projector(p) => toml::Value::try_from(p)?,
    })
}

impl CampaignConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let raw: RawConfig = toml::from_str(text)?;
        let baseline = payload_from_value(raw.family, raw.baseline)?;
        let cfg = Self {
            family: raw.family,
            iterations: raw.iterations,
            budget: raw.budget,
            lambda: raw.lambda,
            tie_policy: raw.tie_policy,
            seed: raw.seed,
            output_dir: raw.output_dir,
            problem: raw.problem,
            proposer: raw.proposer,
            baseline,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.baseline.family() != self.family {
            return Err(CliError::Usage("baseline does not match the campaign family".into()));
        }
        if let Some(l) = self.lambda {
            if self.family != Family::Projector {
                return Err(CliError::Usage("lambda only applies to projector campaigns".into()));
            }
            if !(l >= 0.0) || !l.is_finite() {
                return Err(CliError::Usage("lambda must be a finite number >= 0".into()));
            }
        }
        if self.iterations == 0 {
            return Err(CliError::Usage("iterations must be >= 1".into()));
        }
        self.budget.validate()?;
        self.problem.chain_spec()?;
        if self.family == Family::Dmrg && self.problem.hamiltonian_file.is_some() {
            return Err(CliError::Usage("dmrg campaigns need a spin-chain problem".into()));
        }
        Ok(())
    }

    /// Canonical TOML form; parsing it gives back an equal config.
    pub fn emit(&self) -> Result<String, CliError> {
        let raw = RawConfig {
            family: self.family,
            iterations: self.iterations,
            budget: self.budget,
            lambda: self.lambda,
            tie_policy: self.tie_policy,
            seed: self.seed,
            output_dir: self.output_dir.clone(),
            problem: self.problem.clone(),
            proposer: self.proposer.clone(),
            baseline: payload_to_value(&self.baseline)?,
        };
        Ok(toml::to_string(&raw)?)
    }
}
