//! Exact verification of a family of polynomial Hamiltonian systems with
//! affine Weyl group symmetry, their Lax pencils, holomorphy charts,
//! Backlund transformations, and mKdV-type scalar reductions.
//!
//! The crate is organized around a data catalog (`catalog`) holding every
//! concrete object — total differential systems, Hamiltonians, birational
//! maps, spectral pencils, first integrals, special solutions — together
//! with a claim suite that checks each stated identity exactly. Symbolic
//! computations run on the exact kernel in `exactalg`; a small adaptive
//! integrator in `numerics` covers the handful of non-rational solutions.

pub mod catalog;
pub mod dynsys;
pub mod lax;
pub mod linalg;
pub mod maps;
pub mod numerics;
pub mod reductions;
pub mod exactalg;

pub use exactalg::{Alphabet, Polynomial, Rat, RationalFunction};
