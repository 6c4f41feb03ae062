//! Coupled electron–nucleus spin algebra.
//!
//! Everything here works in the product basis `|m_s⟩ ⊗ |m_I⟩`, both
//! quantum numbers descending, with energies expressed as `E/h` in MHz.

mod eigen;
mod hamiltonian;
mod operators;

pub use eigen::{
    concurrence, diagonalize, doublet_of, expectation_sz, label_of, sx_between, Branch, CVector, DonorEigensystem, DoubletId,
};
pub use hamiltonian::{build_hamiltonian, build_hamiltonian_from_operators, SpinSystem};
pub use operators::{kron, spin_matrices, CMatrix, HalfInteger, SpinMatrices, SpinOperators};
