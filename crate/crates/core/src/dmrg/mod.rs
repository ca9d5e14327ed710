//! Density-matrix renormalization group on open spin chains.

mod env;
mod mi;
mod mpo;
mod mps;
mod reference;
mod sweep;

pub use mi::{mi_error, mutual_information};
pub use mpo::{build_mpo, MpoOperator, DENSE_MPO_CAP};
pub use mps::{init_mps, InitKind, MatrixProductState, DENSE_MPS_CAP};
pub use reference::{fingerprint, make_reference, ReferenceBundle, META_FILE, MI_FILE};
pub use sweep::{run_dmrg, DmrgMethod, DmrgOutcome, DmrgProtocol, DmrgStage, SweepRecord};
