//! Small dense complex linear algebra and Lindblad propagation.

mod density;
mod eigen;
mod grid;
mod lindblad;
mod matrix;

pub use density::{state_fidelity, DensityMatrix};
pub use eigen::{eig_hermitian, HermitianEigen};
pub use grid::TimeGrid;
pub use lindblad::{
    propagate_adjoint, propagate_final, propagate_lindblad, propagate_state, propagate_with, ControlTerm, LindbladGenerator,
    TimeDependentTerm, MAX_TRACE_DRIFT, RENORMALIZE_EVERY,
};
pub use matrix::{kron, pauli, ComplexMatrix, I, ONE, ZERO};
