//! Variational benchmark on a statevector simulator.

mod ansatz;
mod gradient;
mod optimize;
mod run;

pub use ansatz::{
    exchange_pool, hopping_pool, parse_pool_file, prepare_state, AnsatzFamily, AnsatzSpec, InitPolicy, PoolGenerator,
    PoolKind, PoolSource,
};
pub use gradient::{gradient_variance, parameter_shift_derivative, GradientStats};
pub use optimize::{minimize, OptimizerKind, OptimizerSpec, StopReason};
pub use run::{energy, run_vqe, trace_to_csv, VqeProtocol, VqeResult};
