use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::algebra::MatrixAlgebra;
use super::tomita::{tomita, ModularData};
use crate::error::{Error, Result};
use crate::fock::{free_word_vector, star_operator, z_involution, FockSpace, FreeOperator, Label};
use crate::freeness::MomentWord;
use crate::linalg::{CMatrix, CVector};

/// Seed-level modular data must fix `Omega_k` to this accuracy.
pub const SEED_MATCH_TOL: f64 = 1e-10;

/// Free products of seed modular objects on a fixed [`FockSpace`].
#[derive(Debug, Clone)]
pub struct FreeModular {
    seeds: BTreeMap<Label, ModularData>,
    j: FreeOperator,
    delta_half: FreeOperator,
}

impl FreeModular {
    pub fn new(fock: &FockSpace, seeds: BTreeMap<Label, ModularData>) -> Result<Self> {
        for seed in fock.seeds() {
            let md = seeds.get(&seed.label()).ok_or(Error::UnknownLabel(seed.label()))?;
            if md.dim() != seed.dim() {
                return Err(Error::DimensionMismatch { expected: seed.dim(), got: md.dim() });
            }
            let gap = (&md.omega - seed.omega()).norm();
            if gap > SEED_MATCH_TOL {
                return Err(Error::InvalidSeed {
                    label: seed.label(),
                    reason: format!("modular data built for a different vector (distance {gap:.3e})"),
                });
            }
        }
        let j_ops: BTreeMap<Label, CMatrix> = seeds.iter().map(|(l, md)| (*l, md.j.clone())).collect();
        let half_ops: BTreeMap<Label, CMatrix> = seeds.iter().map(|(l, md)| (*l, md.delta_pow(0.5))).collect();
        let j = star_operator(fock, &j_ops, true)?;
        let delta_half = star_operator(fock, &half_ops, false)?;
        Ok(FreeModular { seeds, j, delta_half })
    }

    pub fn seed(&self, label: Label) -> Result<&ModularData> {
        self.seeds.get(&label).ok_or(Error::UnknownLabel(label))
    }

    /// `⋆ J_k`, antilinear.
    pub fn j(&self) -> &FreeOperator {
        &self.j
    }

    /// `⋆ Delta_k^{1/2}`.
    pub fn delta_half(&self) -> &FreeOperator {
        &self.delta_half
    }

    /// `⋆ Delta_k^{it}`.
    pub fn delta_it(&self, fock: &FockSpace, t: f64) -> Result<FreeOperator> {
        let ops: BTreeMap<Label, CMatrix> = self.seeds.iter().map(|(l, md)| (*l, md.delta_it(t))).collect();
        star_operator(fock, &ops, false)
    }

    /// `S_free = (⋆ J_k) Z (⋆ Delta_k^{1/2})` applied to `v`.
    pub fn apply_s(&self, fock: &FockSpace, v: &CVector) -> Result<CVector> {
        let half = self.delta_half.apply(fock, v)?;
        let reversed = z_involution(fock, &half)?;
        self.j.apply(fock, &reversed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StarResiduals {
    /// `‖(⋆Delta^{it}) x_1...x_n Omega - σ_t(x_1)...σ_t(x_n) Omega‖`
    pub flow: f64,
    /// `‖S_free x_1...x_n Omega - x_n^*...x_1^* Omega‖`
    pub s_identity: f64,
    pub exact: bool,
}

/// Compares free products of seed modular objects against the flow and
/// the `S` map evaluated word by word.
pub fn verify_modular_star(
    fock: &FockSpace,
    seed_modular: &BTreeMap<Label, ModularData>,
    word: &MomentWord,
    t: f64,
) -> Result<StarResiduals> {
    let free = FreeModular::new(fock, seed_modular.clone())?;
    verify_with(fock, &free, word, t)
}

/// As [`verify_modular_star`], reusing prebuilt free-product operators.
pub fn verify_with(fock: &FockSpace, free: &FreeModular, word: &MomentWord, t: f64) -> Result<StarResiduals> {
    if word.len() > fock.max_len() {
        return Err(Error::Inexact { len: word.len(), max_len: fock.max_len() });
    }
    let (v, exact_v) = free_word_vector(fock, &word.factors)?;

    let u = free.delta_it(fock, t)?;
    let flowed = u.apply(fock, &v)?;
    let sigma_factors =
        word.factors.iter().map(|(l, x)| Ok((*l, free.seed(*l)?.sigma(t, x)))).collect::<Result<Vec<_>>>()?;
    let (direct, exact_f) = free_word_vector(fock, &sigma_factors)?;

    let s_v = free.apply_s(fock, &v)?;
    let (adjoint, exact_a) = free_word_vector(fock, &word.adjoint().factors)?;

    Ok(StarResiduals {
        flow: (flowed - direct).norm(),
        s_identity: (s_v - adjoint).norm(),
        exact: exact_v && exact_f && exact_a,
    })
}

/// Generators of `N_k`, generators of `M_k`, and `Omega_k`.
pub type InclusionPair = (Vec<CMatrix>, Vec<CMatrix>, CVector);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowInclusionRow {
    pub label: Label,
    pub t: f64,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowInclusionReport {
    pub rows: Vec<FlowInclusionRow>,
    pub max_violation: f64,
}

/// Membership tolerance for `N_k ⊆ M_k`.
pub const INCLUSION_TOL: f64 = 1e-9;

/// Distance of `σ_t^{M_k}(n)` from `N_k` over a basis of `N_k` for each
/// label and each `t` in the grid.
pub fn flow_inclusion_check(pairs: &BTreeMap<Label, InclusionPair>, t_grid: &[f64]) -> Result<FlowInclusionReport> {
    if let Some(&t) = t_grid.iter().find(|t| !(**t >= 0.0)) {
        return Err(Error::InvalidParameter { name: "t_grid", reason: format!("times must be nonnegative, got {t}") });
    }
    let mut rows = Vec::new();
    for (label, (n_gens, m_gens, omega)) in pairs {
        let size = omega.len();
        let n = MatrixAlgebra::generate(size, n_gens.clone())?;
        let m = MatrixAlgebra::generate(size, m_gens.clone())?;
        let residual = m.inclusion_residual(&n);
        if residual > INCLUSION_TOL {
            return Err(Error::NotSubalgebra { residual });
        }
        let md = tomita(&m, omega)?;
        for &t in t_grid {
            let u = md.delta_it(t);
            let distance = n.basis().iter().map(|x| n.distance(&(&u * x * u.adjoint()))).fold(0.0, f64::max);
            rows.push(FlowInclusionRow { label: *label, t, distance });
        }
    }
    let max_violation = rows.iter().map(|r| r.distance).fold(0.0, f64::max);
    Ok(FlowInclusionReport { rows, max_violation })
}
