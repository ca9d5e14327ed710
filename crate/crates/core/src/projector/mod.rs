//! Stochastic imaginary-time projection on small dense Hamiltonians.
//!
//! The off-diagonal part of `H` is written as a sum of squared rank-one
//! fields, each decoupled by a Gaussian auxiliary variable. Walkers are
//! dense vectors propagated by sampled `B(x)` factors, renormalized into
//! their weights and comb-resampled at fixed cadences.

mod factor;
mod walkers;

pub use factor::{factorize, sample_propagator, Field, HsFactorization, FACTOR_DIM_CAP, SHIFT_MARGIN};
pub use walkers::{
    live_score, pe_stats, run_projector, stochastic_cost, ProjectorConfig, RunTrace, TrialKind, WalkerEnsemble,
    DEFAULT_LAMBDA,
};
