//! Dense complex linear algebra and density-matrix primitives.

mod density;
mod eigen;
mod matrix;
pub(crate) mod subsystems;

pub use density::{
    check_projector, entropy_of_spectrum, fidelity_pure, partial_trace, project_and_condition, tensor,
    von_neumann_entropy, Conditioned, DensityMatrix, PureState, HYGIENE_MAX_DIM, MAX_TOTAL_DIM,
    MIN_PROBABILITY, NORM_TOL, STATE_TOL,
};
pub use eigen::{eigh, eigvalsh, HermitianEigen, HERMITIAN_TOL};
pub use matrix::{pauli, weyl, ComplexMatrix};
pub use subsystems::total_dim;
