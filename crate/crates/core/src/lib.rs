//! Numerical laboratory for free products of pointed Hilbert spaces and
//! the operator algebras acting on them.
//!
//! * [`fock`]: truncated free-product spaces, left/right actions, the
//!   word-reversal involution and block (`⋆`) operators.
//! * [`freeness`]: vector states, mixed moments and free-independence checks.
//! * [`modular`]: finite-dimensional Tomita-Takesaki theory and its
//!   factorization over free products.
//! * [`spectral`]: heat traces of free-product Hamiltonians and their bounds.
//! * [`smatrix`]: free massive fields in rapidity space and the two-particle
//!   S-matrix of the free product of two copies.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fock;
pub mod freeness;
pub mod linalg;
pub mod modular;
pub mod par;
pub mod smatrix;
pub mod spectral;

pub use error::{Error, Result};
