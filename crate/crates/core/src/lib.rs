//! Rovibrational energy levels from a Watson Hamiltonian, its qubit encoding,
//! Trotterized trial states and sampling-based subspace diagonalization.

pub mod baselines;
pub mod basis;
pub mod error;
pub mod linalg;
pub mod molecule;
pub mod operators;
pub mod pauli;
pub mod qsci;
pub mod trotter;
pub mod units;
pub mod watson;

pub use basis::{BasisSpace, RovibBasisState};
pub use error::{Error, Result};
pub use molecule::{DerivedFrame, MoleculeModel};
pub use pauli::{PauliString, PauliSum};
pub use watson::{GroupMask, SparseHamiltonian, TermGroup, WatsonHamiltonian};

pub type C64 = num_complex::Complex64;
