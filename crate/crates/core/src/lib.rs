//! Numerical toolkit for nonlocality activation in three-party networks.
//!
//! The crate is organised bottom-up:
//!
//! - [`qcore`]: dense complex matrices, a cyclic Jacobi eigensolver, density
//!   matrices over a tensor factorisation, partial traces, conditioning and
//!   von Neumann entropy.
//! - [`states`]: maximally entangled, isotropic and erased states, plus
//!   Hilbert-Schmidt and Fubini-Study random samplers with explicit seeds.
//! - [`criteria`]: the Horodecki CHSH criterion, the hashing (one-way
//!   distillability) criterion and the combined classifier.
//! - [`channels`]: Kraus channels for amplitude damping, phase damping,
//!   depolarisation, the `d`-dimensional depolarising channel and erasure.
//! - [`protocols`]: double teleportation through isotropic states, the
//!   two-step erased-state protocol and the symmetric-extension witness.
//!
//! Subsystem convention: for `dims = [d0, d1, ..]`, subsystem 0 is the
//! leftmost Kronecker factor, i.e. the slowest-varying digit of the flat
//! basis index.

pub mod channels;
pub mod criteria;
mod error;
pub mod protocols;
pub mod qcore;
pub mod states;

pub use error::{Error, Result};
pub use qcore::{ComplexMatrix, DensityMatrix, PureState};

pub use num_complex::Complex64;
