//! Reference protocols and the archived energies they are checked against.

use serde::{Deserialize, Serialize};

use crate::dmrg::{DmrgMethod, DmrgProtocol, DmrgStage, InitKind};
use crate::hamiltonian::SpinChainSpec;
use crate::projector::{ProjectorConfig, TrialKind};
use crate::vqe::{AnsatzFamily, AnsatzSpec, InitPolicy, OptimizerKind, OptimizerSpec, PoolKind, PoolSource, VqeProtocol};

/// Chain length of the archived DMRG runs.
pub const BENCH_LENGTH: usize = 64;

const FULL_RAMP: [usize; 9] = [8, 12, 16, 24, 32, 48, 64, 80, 96];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchChain {
    Xxx,
    Xxz,
    Tfim,
    Xx,
}

impl BenchChain {
    pub const ALL: [BenchChain; 4] = [BenchChain::Xxx, BenchChain::Xxz, BenchChain::Tfim, BenchChain::Xx];

    pub fn spec(self, l: usize) -> SpinChainSpec {
        match self {
            BenchChain::Xxx => SpinChainSpec::heisenberg_xxx(l),
            BenchChain::Xxz => SpinChainSpec::gapless_xxz(l),
            BenchChain::Tfim => SpinChainSpec::critical_tfim(l),
            BenchChain::Xx => SpinChainSpec::critical_xx(l),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BenchChain::Xxx => "xxx",
            BenchChain::Xxz => "xxz",
            BenchChain::Tfim => "tfim",
            BenchChain::Xx => "xx",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }

    /// Archived final energy of the best protocol at [`BENCH_LENGTH`].
    pub fn best_energy(self) -> f64 {
        match self {
            BenchChain::Xxx => -28.175425,
            BenchChain::Xxz => -23.828520,
            BenchChain::Tfim => -20.281495,
            BenchChain::Xx => -20.192157,
        }
    }

    /// Archived final energy of the shared baseline at [`BENCH_LENGTH`].
    pub fn baseline_energy(self) -> f64 {
        match self {
            BenchChain::Xxx => -28.165820,
            BenchChain::Xxz => -23.816607,
            BenchChain::Tfim => -20.281472,
            BenchChain::Xx => -20.179132,
        }
    }

    pub fn best_protocol(self) -> DmrgProtocol {
        let stages = match self {
            BenchChain::Xxx => vec![DmrgStage {
                init_bond: 8,
                ..stage(DmrgMethod::Dmrg2, InitKind::Neel, &FULL_RAMP, 1e-14, 1e-7, 19, 6)
            }],
            BenchChain::Xxz => vec![
                stage(DmrgMethod::Dmrg1, InitKind::Neel, &[8, 12, 16, 24, 32, 48], 1e-9, 1e-5, 5, 4),
                stage(DmrgMethod::Dmrg2, InitKind::Inherit, &[148, 192], 4.8e-14, 1e-6, 5, 4),
            ],
            BenchChain::Tfim => vec![
                stage(DmrgMethod::Dmrg2, InitKind::Plus, &FULL_RAMP, 1e-10, 1e-7, 18, 4),
                stage(DmrgMethod::Dmrg1, InitKind::Inherit, &[48, 64, 80], 1e-10, 5e-7, 12, 4),
            ],
            BenchChain::Xx => vec![stage(DmrgMethod::Dmrg2, InitKind::Random { seed: 0 }, &FULL_RAMP, 1e-10, 1e-5, 23, 12)],
        };
        DmrgProtocol { stages }
    }
}

fn stage(method: DmrgMethod, init: InitKind, bonds: &[usize], cutoff: f64, eig_tol: f64, sweeps: usize, ncv: usize) -> DmrgStage {
    DmrgStage {
        method,
        bond_schedule: bonds.to_vec(),
        cutoff,
        eig_tol,
        max_sweeps: sweeps,
        ncv,
        init,
        init_bond: 1,
    }
}

/// Shared DMRG starting point of every campaign: one-site sweeps from a
/// random bond-2 state.
pub fn dmrg_baseline(seed: u64) -> DmrgProtocol {
    DmrgProtocol {
        stages: vec![DmrgStage {
            init_bond: 2,
            ..stage(DmrgMethod::Dmrg1, InitKind::Random { seed }, &[4, 6, 8], 1e-6, 1e-3, 6, 4)
        }],
    }
}

/// High-accuracy two-site protocol used for frozen references.
pub fn reference_protocol() -> DmrgProtocol {
    DmrgProtocol {
        stages: vec![stage(DmrgMethod::Dmrg2, InitKind::Neel, &[8, 16, 32, 64, 96], 1e-12, 1e-9, 10, 6)],
    }
}

/// Walker baseline: 2 x 32 walkers, 25 steps x 40 blocks, matching
/// stabilization and resampling cadence.
pub fn projector_baseline(seed: u64) -> ProjectorConfig {
    ProjectorConfig {
        walkers_per_rank: 32,
        num_ranks: 2,
        steps_per_block: 25,
        num_blocks: 40,
        timestep: 0.005,
        field_cutoff: 1e-5,
        stabilize_freq: 5,
        pop_control_freq: 5,
        trial: TrialKind::DiagonalGround,
        seed,
    }
}

/// Pool ansatz from the Neel reference with nearest and next-nearest
/// exchange rotations.
pub fn vqe_pool_baseline(l: usize, layers: usize, seed: u64) -> VqeProtocol {
    let reference: String = (0..l).map(|i| if i % 2 == 0 { '0' } else { '1' }).collect();
    VqeProtocol {
        ansatz: AnsatzSpec {
            family: AnsatzFamily::PauliPool { pool: PoolSource::Builtin { kind: PoolKind::Exchange, layers } },
            reference,
            init: InitPolicy::Gaussian { scale: 0.1 },
            seed,
        },
        optimizer: OptimizerSpec {
            kind: OptimizerKind::LineSearchCyclic,
            rhobeg: 0.5,
            tol: 1e-8,
            xtol: 1e-8,
            max_steps: 100_000,
            seed,
        },
    }
}
