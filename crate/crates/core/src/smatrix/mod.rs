//! Massive free field in rapidity variables and the two-particle
//! scattering of the free product of two copies.

mod packet;
mod rapidity;
mod scattering;
mod symfock;

pub use packet::*;
pub use rapidity::*;
pub use scattering::*;
pub use symfock::*;
