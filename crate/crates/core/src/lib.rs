//! Fixed-budget ground-state preparation benchmarks and a protocol search loop.
//!
//! Three solver families share one Hamiltonian layer:
//!
//! * [`vqe`]: parameterized circuits on a statevector simulator, scored by the
//!   Rayleigh quotient and minimized with derivative-free optimizers.
//! * [`dmrg`]: one- and two-site DMRG over matrix product states for the
//!   open spin-1/2 chain family, with mutual-information diagnostics.
//! * [`projector`]: a Hubbard-Stratonovich walker projector for small dense
//!   Hamiltonians, scored by the post-equilibration live objective.
//!
//! [`campaign`] wraps all three in a mutate, score and archive loop that
//! writes an append-only JSON-lines log.
//!
//! The `parallel` feature (on by default) runs walker propagation, pairwise
//! density matrices, gradient sampling and speculative candidate scoring on
//! rayon. Disabling it gives the sequential path with bit-identical results.

pub mod budget;
pub mod campaign;
pub mod dmrg;
pub mod error;
pub mod hamiltonian;
pub mod io;
pub mod linalg;
pub mod parallel;
pub mod presets;
pub mod projector;
pub mod vqe;

pub use budget::{Budget, BudgetMeter};
pub use error::{Error, Result};
pub use hamiltonian::{PauliHamiltonian, PauliString, PauliTerm, SpinChainSpec};

/// Complex amplitude type used by every state-vector in the crate.
pub type C64 = num_complex::Complex64;
