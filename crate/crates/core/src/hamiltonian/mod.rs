//! Pauli-string Hamiltonians, the open spin-1/2 chain family, and the exact
//! references every solver is checked against.

mod exact;
mod file;
mod free_fermion;
mod pauli;
mod spin_chain;

pub use exact::{exact_ground, DENSE_CUTOFF, EXACT_CAP};
pub use file::{parse_hamiltonian_file, write_hamiltonian_file};
pub use free_fermion::{free_fermion_ground_energy, FreeFermionFamily};
pub use pauli::{Pauli, PauliAction, PauliHamiltonian, PauliString, PauliTerm};
pub use spin_chain::{build_spin_chain, SpinChainSpec};
