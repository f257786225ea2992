#![allow(dead_code)]

use freelab::fock::{project_sectors, FockSpace, SeedSpace};
use freelab::linalg::{random_unit_vector, random_unitary, random_vector, CMatrix, CVector, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seeds labelled `1..` with the given dimensions and random unit vacua.
pub fn random_fock(rng: &mut ChaCha8Rng, dims: &[usize], max_len: usize) -> FockSpace {
    let seeds =
        dims.iter().enumerate().map(|(i, &d)| SeedSpace::new(i + 1, random_unit_vector(rng, d)).unwrap()).collect();
    FockSpace::new(seeds, max_len).unwrap()
}

/// Random vector supported on words of length at most `len`.
pub fn short_vector(rng: &mut ChaCha8Rng, fock: &FockSpace, len: usize) -> CVector {
    let v = random_vector(rng, fock.total_dim());
    project_sectors(fock, &v, |w| w.len() <= len).unwrap()
}

/// Random unitary on the seed space fixing its vacuum.
pub fn unitary_fixing_vacuum(rng: &mut ChaCha8Rng, seed: &SeedSpace) -> CMatrix {
    let d = seed.dim();
    let mut block = CMatrix::identity(d, d);
    if d > 1 {
        block.view_mut((1, 1), (d - 1, d - 1)).copy_from(&random_unitary(rng, d - 1));
    }
    let b = seed.adapted_basis();
    b * block * b.adjoint()
}

pub fn scalar(re: f64) -> C64 {
    C64::new(re, 0.0)
}
