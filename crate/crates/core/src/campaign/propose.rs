use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver};
use std::time::Duration;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::archive::CandidateRecord;
use super::score::{Family, Payload, Protocol};
use crate::dmrg::{DmrgMethod, InitKind};
use crate::error::{Error, Result};
use crate::projector::TrialKind;
use crate::vqe::{AnsatzFamily, InitPolicy, OptimizerKind, PoolSource};

/// Multiplicative steps applied to numeric levers.
pub const NUMERIC_FACTORS: [f64; 4] = [0.5, 0.8, 1.25, 2.0];
/// Records shown to a proposer alongside the current best.
pub const ARCHIVE_TAIL: usize = 10;
pub const EXTERNAL_TIMEOUT: Duration = Duration::from_secs(30);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Proposal {
    pub protocol: Protocol,
    pub summary: String,
}

/// What a proposer sees before each iteration.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ArchiveView<'a> {
    pub archive_tail: &'a [CandidateRecord],
    pub best_protocol: &'a Protocol,
}

pub trait Proposer {
    fn propose(&mut self, view: &ArchiveView<'_>) -> Result<Proposal>;

    /// True when proposals ignore the archive, so several can be scored
    /// ahead of the acceptance decisions.
    fn independent(&self) -> bool {
        false
    }
}

/// One tunable knob of a protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lever {
    // dmrg, applied to a uniformly chosen stage
    Method,
    Init,
    BondSchedule,
    Cutoff,
    EigTol,
    MaxSweeps,
    Ncv,
    InitBond,
    // projector
    Timestep,
    WalkersPerRank,
    StepsPerBlock,
    NumBlocks,
    FieldCutoff,
    StabilizeFreq,
    PopControlFreq,
    Trial,
    // vqe
    Optimizer,
    Rhobeg,
    Tol,
    Xtol,
    Layers,
    InitScale,
}

impl Lever {
    pub fn family(self) -> Family {
        use Lever::*;
        match self {
            Method | Init | BondSchedule | Cutoff | EigTol | MaxSweeps | Ncv | InitBond => Family::Dmrg,
            Timestep | WalkersPerRank | StepsPerBlock | NumBlocks | FieldCutoff | StabilizeFreq | PopControlFreq
            | Trial => Family::Projector,
            Optimizer | Rhobeg | Tol | Xtol | Layers | InitScale => Family::Vqe,
        }
    }
}

pub fn default_levers(family: Family) -> Vec<Lever> {
    use Lever::*;
    match family {
        Family::Dmrg => vec![Method, Init, BondSchedule, Cutoff, EigTol, MaxSweeps, Ncv, InitBond],
        Family::Projector => {
            vec![Timestep, WalkersPerRank, StepsPerBlock, NumBlocks, FieldCutoff, StabilizeFreq, PopControlFreq, Trial]
        }
        Family::Vqe => vec![Optimizer, Rhobeg, Tol, Xtol, Layers, InitScale],
    }
}

/// Seeded one-lever-at-a-time mutation of the current best protocol.
#[derive(Debug, Clone)]
pub struct MutationProposer {
    rng: ChaCha8Rng,
    levers: Vec<Lever>,
}

impl MutationProposer {
    pub fn new(seed: u64, levers: Vec<Lever>) -> Result<Self> {
        if levers.is_empty() {
            return Err(Error::invalid("lever table is empty"));
        }
        Ok(Self { rng: ChaCha8Rng::seed_from_u64(seed), levers })
    }

    /// Applies one lever drawn from the table. Levers of another family
    /// are skipped; a table with none for this family is an error.
    pub fn mutate(&mut self, base: &Protocol) -> Result<Proposal> {
        let usable: Vec<Lever> = self.levers.iter().copied().filter(|l| l.family() == base.family()).collect();
        let lever = *usable
            .choose(&mut self.rng)
            .ok_or_else(|| Error::invalid(format!("no levers for family {}", base.family().name())))?;
        let mut protocol = base.clone();
        let what = apply_lever(&mut self.rng, &mut protocol.payload, lever);
        protocol.label = what.clone();
        Ok(Proposal { protocol, summary: what })
    }
}

impl Proposer for MutationProposer {
    fn propose(&mut self, view: &ArchiveView<'_>) -> Result<Proposal> {
        self.mutate(view.best_protocol)
    }
}

fn scale_real<R: Rng>(rng: &mut R, v: f64) -> f64 {
    v * NUMERIC_FACTORS[rng.random_range(0..NUMERIC_FACTORS.len())]
}

fn scale_int<R: Rng>(rng: &mut R, v: usize, min: usize) -> usize {
    let f = NUMERIC_FACTORS[rng.random_range(0..NUMERIC_FACTORS.len())];
    ((v as f64 * f).round() as usize).max(min)
}

fn pick_other<R: Rng, T: Clone + PartialEq>(rng: &mut R, current: &T, options: &[T]) -> T {
    let others: Vec<&T> = options.iter().filter(|o| *o != current).collect();
    others.choose(rng).map(|o| (*o).clone()).unwrap_or_else(|| current.clone())
}

fn mutate_schedule<R: Rng>(rng: &mut R, bonds: &mut Vec<usize>) -> &'static str {
    let last = *bonds.last().unwrap_or(&1);
    match rng.random_range(0..3) {
        0 => {
            bonds.push(((last as f64 * 1.5).round() as usize).max(last + 1));
            "append"
        }
        1 => {
            bonds.push(last);
            "extend"
        }
        _ if bonds.len() > 1 => {
            bonds.pop();
            "trim"
        }
        _ => {
            bonds[0] = (last * 2).max(1);
            "double"
        }
    }
}

fn apply_lever<R: Rng>(rng: &mut R, payload: &mut Payload, lever: Lever) -> String {
    match payload {
        Payload::Dmrg(p) => {
            let si = rng.random_range(0..p.stages.len());
            let st = &mut p.stages[si];
            match lever {
                Lever::Method => {
                    st.method = pick_other(rng, &st.method, &[DmrgMethod::Dmrg1, DmrgMethod::Dmrg2]);
                    format!("stage {si} method -> {:?}", st.method)
                }
                Lever::Init => {
                    let mut opts = vec![
                        InitKind::Random { seed: rng.random_range(0..1000) },
                        InitKind::Neel,
                        InitKind::Plus,
                        InitKind::Minus,
                        InitKind::ProductUp,
                        InitKind::ProductDown,
                    ];
                    if si > 0 {
                        opts.push(InitKind::Inherit);
                    }
                    st.init = pick_other(rng, &st.init, &opts);
                    format!("stage {si} init -> {:?}", st.init)
                }
                Lever::BondSchedule => {
                    let how = mutate_schedule(rng, &mut st.bond_schedule);
                    format!("stage {si} bonds {how} -> {:?}", st.bond_schedule)
                }
                Lever::Cutoff => {
                    st.cutoff = scale_real(rng, st.cutoff).min(0.5);
                    format!("stage {si} cutoff -> {:e}", st.cutoff)
                }
                Lever::EigTol => {
                    st.eig_tol = scale_real(rng, st.eig_tol).max(1e-15);
                    format!("stage {si} eig_tol -> {:e}", st.eig_tol)
                }
                Lever::MaxSweeps => {
                    st.max_sweeps = scale_int(rng, st.max_sweeps, 1);
                    format!("stage {si} sweeps -> {}", st.max_sweeps)
                }
                Lever::Ncv => {
                    st.ncv = scale_int(rng, st.ncv, 2);
                    format!("stage {si} ncv -> {}", st.ncv)
                }
                Lever::InitBond => {
                    st.init_bond = scale_int(rng, st.init_bond, 1);
                    format!("stage {si} init_bond -> {}", st.init_bond)
                }
                other => format!("lever {other:?} does not apply"),
            }
        }
        Payload::Projector(c) => match lever {
            Lever::Timestep => {
                c.timestep = scale_real(rng, c.timestep);
                format!("timestep -> {}", c.timestep)
            }
            Lever::WalkersPerRank => {
                c.walkers_per_rank = scale_int(rng, c.walkers_per_rank, 1);
                format!("walkers_per_rank -> {}", c.walkers_per_rank)
            }
            Lever::StepsPerBlock => {
                c.steps_per_block = scale_int(rng, c.steps_per_block, 1);
                format!("steps_per_block -> {}", c.steps_per_block)
            }
            Lever::NumBlocks => {
                c.num_blocks = scale_int(rng, c.num_blocks, 2);
                format!("num_blocks -> {}", c.num_blocks)
            }
            Lever::FieldCutoff => {
                c.field_cutoff = scale_real(rng, c.field_cutoff);
                format!("field_cutoff -> {:e}", c.field_cutoff)
            }
            Lever::StabilizeFreq => {
                c.stabilize_freq = scale_int(rng, c.stabilize_freq, 1);
                format!("stabilize_freq -> {}", c.stabilize_freq)
            }
            Lever::PopControlFreq => {
                c.pop_control_freq = scale_int(rng, c.pop_control_freq, 1);
                format!("pop_control_freq -> {}", c.pop_control_freq)
            }
            Lever::Trial => {
                c.trial = pick_other(rng, &c.trial, &[TrialKind::DiagonalGround, TrialKind::Uniform, TrialKind::Exact]);
                format!("trial -> {:?}", c.trial)
            }
            other => format!("lever {other:?} does not apply"),
        },
        Payload::Vqe(p) => match lever {
            Lever::Optimizer => {
                let kinds = [OptimizerKind::LinearTrustRegion, OptimizerKind::LineSearchCyclic, OptimizerKind::Simplex];
                p.optimizer.kind = pick_other(rng, &p.optimizer.kind, &kinds);
                format!("optimizer -> {:?}", p.optimizer.kind)
            }
            Lever::Rhobeg => {
                p.optimizer.rhobeg = scale_real(rng, p.optimizer.rhobeg);
                format!("rhobeg -> {}", p.optimizer.rhobeg)
            }
            Lever::Tol => {
                p.optimizer.tol = scale_real(rng, p.optimizer.tol);
                format!("tol -> {:e}", p.optimizer.tol)
            }
            Lever::Xtol => {
                p.optimizer.xtol = scale_real(rng, p.optimizer.xtol);
                format!("xtol -> {:e}", p.optimizer.xtol)
            }
            Lever::Layers => {
                let layers = match &mut p.ansatz.family {
                    AnsatzFamily::HeaRyrzRing { layers } => layers,
                    AnsatzFamily::PauliPool { pool: PoolSource::Builtin { layers, .. } } => layers,
                    AnsatzFamily::PauliPool { pool: PoolSource::Generators(_) } => {
                        return "layers fixed by explicit generators".into();
                    }
                };
                *layers = scale_int(rng, *layers, 1);
                // the parameter count changed, so warm starts no longer fit
                if matches!(p.ansatz.init, InitPolicy::WarmStart(_)) {
                    p.ansatz.init = InitPolicy::Zeros;
                }
                format!("layers -> {layers}")
            }
            Lever::InitScale => {
                let scale = match p.ansatz.init {
                    InitPolicy::Gaussian { scale } => scale_real(rng, scale),
                    _ => 0.1,
                };
                p.ansatz.init = InitPolicy::Gaussian { scale };
                format!("init gaussian scale -> {scale}")
            }
            other => format!("lever {other:?} does not apply"),
        },
    }
}

/// Replays a fixed list of proposals, then reports exhaustion.
#[derive(Debug, Clone)]
pub struct ScriptedProposer {
    items: Vec<Proposal>,
    next: usize,
}

impl ScriptedProposer {
    pub fn new(items: Vec<Proposal>) -> Self {
        Self { items, next: 0 }
    }

    /// One JSON proposal (`{protocol, summary}`) per non-empty line.
    pub fn from_jsonl(text: &str) -> Result<Self> {
        let mut items = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let p: Proposal =
                serde_json::from_str(line).map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() })?;
            items.push(p);
        }
        Ok(Self::new(items))
    }
}

impl Proposer for ScriptedProposer {
    fn propose(&mut self, _view: &ArchiveView<'_>) -> Result<Proposal> {
        let item = self.items.get(self.next).cloned().ok_or_else(|| Error::Evaluation("script exhausted".into()))?;
        self.next += 1;
        Ok(item)
    }

    fn independent(&self) -> bool {
        true
    }
}

/// Talks to a child process over line-delimited JSON on stdin/stdout.
pub struct ExternalProposer {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
    timeout: Duration,
}

impl ExternalProposer {
    /// Starts `command` through the shell.
    pub fn spawn(command: &str) -> Result<Self> {
        Self::spawn_with_timeout(command, EXTERNAL_TIMEOUT)
    }

    pub fn spawn_with_timeout(command: &str, timeout: Duration) -> Result<Self> {
        let mut child = Command::new("sh").arg("-c").arg(command).stdin(Stdio::piped()).stdout(Stdio::piped()).spawn()?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        std::thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(Self { child, stdin, lines: rx, timeout })
    }
}

impl Proposer for ExternalProposer {
    fn propose(&mut self, view: &ArchiveView<'_>) -> Result<Proposal> {
        let request = serde_json::to_string(view)?;
        writeln!(self.stdin, "{request}")?;
        self.stdin.flush()?;
        let line = match self.lines.recv_timeout(self.timeout) {
            Ok(line) => line?,
            Err(mpsc::RecvTimeoutError::Timeout) => {
                return Err(Error::Evaluation(format!("proposer gave no reply within {:?}", self.timeout)));
            }
            Err(mpsc::RecvTimeoutError::Disconnected) => return Err(Error::Evaluation("proposer exited".into())),
        };
        serde_json::from_str(&line).map_err(|e| Error::Evaluation(format!("bad proposer reply: {e}")))
    }
}

impl Drop for ExternalProposer {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}
