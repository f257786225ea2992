//! Truncated free products of pointed Hilbert spaces.

mod action;
mod operator;
mod seed;
mod space;

pub use action::{
    apply_word, commutation_residual, free_word_vector, lambda_act, project_sectors, project_vacuum_and_letter,
    rho_act, support_length, z_involution, DROP_TOL,
};
pub use operator::{star_generator, star_operator, uniform_ops, Block, FreeOperator, REDUCING_TOL};
pub use seed::{Label, SeedDescriptor, SeedSpace};
pub use space::{build_standard, FockDescriptor, FockSpace, Sector, SectorDescriptor, Word};
