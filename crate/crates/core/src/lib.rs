//! Matrix models of finite C*-dynamical systems and the local trajectories
//! invertibility criterion.
//!
//! A system is a finite group acting on finitely many points, with a matrix
//! fiber of dimension `N` over every point and a unitary cocycle twisting the
//! permutation action. Everything is realized concretely on the coordinate
//! space `C^{|X|·N}`:
//!
//! * [`linalg`] holds the dense complex kernels (Jacobi eigensolver, norms,
//!   rank and span machinery).
//! * [`dynamics`] validates the group, the action and the central partition,
//!   and computes orbits and fixed points of the induced block action.
//! * [`algebra`] realizes the coefficient algebra, the covariance unitaries,
//!   the convolution algebra and its regular representation.
//! * [`trajectories`] builds the per-orbit representations and decides the
//!   isomorphism and localization conditions.
//! * [`repr`] analyses families of representations through the Wedderburn
//!   structure of matrix *-algebras.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod algebra;
pub mod dynamics;
mod error;
pub mod fixtures;
pub mod linalg;
pub mod random;
pub mod repr;
pub mod trajectories;

pub use error::{Error, ValidationError};
pub use linalg::{CMatrix, Tolerances, C64};

pub type Result<T, E = Error> = core::result::Result<T, E>;
