//! Finite-dimensional modular theory and its free-product factorization.

mod algebra;
mod free;
mod gamma;
mod tomita;

pub use algebra::*;
pub use free::*;
pub use gamma::*;
pub use tomita::*;
