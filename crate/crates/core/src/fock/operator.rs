use std::collections::BTreeMap;

use super::seed::Label;
use super::space::FockSpace;
use crate::error::{Error, Result};
use crate::linalg::{conj_matrix, conj_vector, kron, op_norm, CMatrix, CVector};
use crate::par;

/// Tolerance for `T H° ⊆ H°`.
pub const REDUCING_TOL: f64 = 1e-10;

/// One block of a [`FreeOperator`], mapping sector `source` to `target`
/// (indices into [`FockSpace::sectors`]).
#[derive(Debug, Clone)]
pub struct Block {
    pub source: usize,
    pub target: usize,
    pub matrix: CMatrix,
}

/// Sector-block operator on a [`FockSpace`].
///
/// Antilinear operators act as `v -> M conj(v)` blockwise, with `M` the
/// stored matrix and conjugation taken in the fixed coordinate basis.
#[derive(Debug, Clone)]
pub struct FreeOperator {
    pub blocks: Vec<Block>,
    pub antilinear: bool,
    pub exact: bool,
    /// Operator norm of each seed operator the block structure was built from.
    pub seed_norms: BTreeMap<Label, f64>,
}

impl FreeOperator {
    pub fn identity(fock: &FockSpace) -> Self {
        let blocks = fock
            .sectors()
            .iter()
            .enumerate()
            .map(|(i, s)| Block { source: i, target: i, matrix: CMatrix::identity(s.dim, s.dim) })
            .collect();
        Self { blocks, antilinear: false, exact: true, seed_norms: BTreeMap::new() }
    }

    pub fn apply(&self, fock: &FockSpace, v: &CVector) -> Result<CVector> {
        fock.check_vector(v)?;
        let sectors = fock.sectors();
        let input = if self.antilinear { conj_vector(v) } else { v.clone() };
        let mut out = CVector::zeros(fock.total_dim());
        for b in &self.blocks {
            let src = &sectors[b.source];
            let dst = &sectors[b.target];
            let piece = &b.matrix * input.rows(src.offset, src.dim);
            let mut view = out.rows_mut(dst.offset, dst.dim);
            view += piece;
        }
        Ok(out)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &FreeOperator) -> FreeOperator {
        let mut blocks = Vec::new();
        for a in &self.blocks {
            for b in other.blocks.iter().filter(|b| b.target == a.source) {
                let rhs = if self.antilinear { conj_matrix(&b.matrix) } else { b.matrix.clone() };
                blocks.push(Block { source: b.source, target: a.target, matrix: &a.matrix * rhs });
            }
        }
        let mut seed_norms = self.seed_norms.clone();
        for (k, v) in &other.seed_norms {
            seed_norms.entry(*k).and_modify(|n| *n *= v).or_insert(*v);
        }
        FreeOperator {
            blocks,
            antilinear: self.antilinear ^ other.antilinear,
            exact: self.exact && other.exact,
            seed_norms,
        }
    }

    /// Dense matrix of the linear part (`v -> M conj(v)` when antilinear).
    pub fn to_dense(&self, fock: &FockSpace) -> CMatrix {
        let n = fock.total_dim();
        let sectors = fock.sectors();
        let mut m = CMatrix::zeros(n, n);
        for b in &self.blocks {
            let src = &sectors[b.source];
            let dst = &sectors[b.target];
            let mut view = m.view_mut((dst.offset, src.offset), (dst.dim, src.dim));
            view += &b.matrix;
        }
        m
    }
}

fn reduced_blocks(
    fock: &FockSpace,
    ops: &BTreeMap<Label, CMatrix>,
    antilinear: bool,
) -> Result<BTreeMap<Label, CMatrix>> {
    for l in ops.keys() {
        fock.seed(*l)?;
    }
    let mut reduced = BTreeMap::new();
    for seed in fock.seeds() {
        let t = ops.get(&seed.label()).ok_or_else(|| Error::InvalidParameter {
            name: "ops",
            reason: format!("no operator given for label {}", seed.label()),
        })?;
        seed.check_dim(t)?;
        let hat = if antilinear { seed.to_adapted_antilinear(t) } else { seed.to_adapted(t) };
        let r = seed.reduced_dim();
        let leak = (0..r).map(|j| hat[(0, j + 1)].norm()).fold(0.0, f64::max);
        if leak > REDUCING_TOL {
            return Err(Error::NotReducing { label: seed.label(), leak });
        }
        reduced.insert(seed.label(), hat.view((1, 1), (r, r)).into_owned());
    }
    Ok(reduced)
}

/// Free product of seed operators, each required to map the reduced
/// space into itself: `T°_{k_1} (x) ... (x) T°_{k_n}` on every sector and
/// the identity (or complex conjugation) on the vacuum.
pub fn star_operator(fock: &FockSpace, ops: &BTreeMap<Label, CMatrix>, antilinear: bool) -> Result<FreeOperator> {
    let reduced = reduced_blocks(fock, ops, antilinear)?;
    let sectors = fock.sectors();
    let blocks = par::map_range(sectors.len(), |i| {
        let s = &sectors[i];
        let matrix = s.word.letters().iter().fold(CMatrix::identity(1, 1), |acc, l| kron(&acc, &reduced[l]));
        Block { source: i, target: i, matrix }
    });
    let seed_norms = ops.iter().map(|(l, t)| (*l, op_norm(t))).collect();
    Ok(FreeOperator { blocks, antilinear, exact: true, seed_norms })
}

/// Additive counterpart of [`star_operator`]: on every sector the sum
/// `Σ_j 1 (x) ... (x) H°_{k_j} (x) ... (x) 1`, zero on the vacuum. For a
/// family of generators `H_k` with `H_k Omega_k = 0` this is the generator
/// of `t -> ⋆ exp(t H_k)`.
pub fn star_generator(fock: &FockSpace, ops: &BTreeMap<Label, CMatrix>) -> Result<FreeOperator> {
    let reduced = reduced_blocks(fock, ops, false)?;
    let sectors = fock.sectors();
    let blocks = par::map_range(sectors.len(), |i| {
        let s = &sectors[i];
        let mut matrix = CMatrix::zeros(s.dim, s.dim);
        for j in 0..s.shape.len() {
            let left: usize = s.shape[..j].iter().product();
            let right: usize = s.shape[j + 1..].iter().product();
            let term = kron(
                &kron(&CMatrix::identity(left, left), &reduced[&s.word.letters()[j]]),
                &CMatrix::identity(right, right),
            );
            matrix += term;
        }
        Block { source: i, target: i, matrix }
    });
    let seed_norms = ops.iter().map(|(l, t)| (*l, op_norm(t))).collect();
    Ok(FreeOperator { blocks, antilinear: false, exact: true, seed_norms })
}

/// Scalar helper: `⋆` of the same seed operator at every label.
pub fn uniform_ops(fock: &FockSpace, f: impl Fn(usize) -> CMatrix) -> BTreeMap<Label, CMatrix> {
    fock.seeds().iter().map(|s| (s.label(), f(s.dim()))).collect()
}
