use serde::{Deserialize, Serialize};

use super::algebra::MatrixAlgebra;
use crate::error::{Error, Result};
use crate::linalg::{conj_matrix, conj_vector, hermitian_eigen, hermitian_fn, rank, CMatrix, CVector, C64};

/// Eigenvalues of `Delta` are clamped from below at this value before
/// taking negative or fractional powers.
pub const EIGEN_FLOOR: f64 = 1e-14;
pub const RANK_TOL: f64 = 1e-9;
pub const AXIOM_TOL: f64 = 1e-9;

/// Modular objects of an algebra with a cyclic and separating vector.
///
/// `s` and `j` are antilinear and stored as matrices `M` acting by
/// `v -> M conj(v)`.
#[derive(Debug, Clone)]
pub struct ModularData {
    pub s: CMatrix,
    pub delta: CMatrix,
    pub j: CMatrix,
    pub omega: CVector,
    /// Vectors `x_i Omega` for the algebra basis used to assemble `S`.
    pub cyclic_basis: Vec<CVector>,
    pub delta_spectrum: Vec<f64>,
    /// Ratio of the largest to the (clamped) smallest eigenvalue of `Delta`.
    pub condition_number: f64,
}

impl ModularData {
    pub fn dim(&self) -> usize {
        self.omega.len()
    }

    /// `Delta^p` for real `p`.
    pub fn delta_pow(&self, p: f64) -> CMatrix {
        hermitian_fn(&self.delta, |x| C64::new(x.max(EIGEN_FLOOR).powf(p), 0.0))
    }

    /// `Delta^{it}`.
    pub fn delta_it(&self, t: f64) -> CMatrix {
        hermitian_fn(&self.delta, |x| C64::new(0.0, t * x.max(EIGEN_FLOOR).ln()).exp())
    }

    /// Modular flow `sigma_t(x) = Delta^{it} x Delta^{-it}`.
    pub fn sigma(&self, t: f64, x: &CMatrix) -> CMatrix {
        let u = self.delta_it(t);
        &u * x * u.adjoint()
    }

    /// `S v` for a vector.
    pub fn apply_s(&self, v: &CVector) -> CVector {
        &self.s * conj_vector(v)
    }

    /// `J v` for a vector.
    pub fn apply_j(&self, v: &CVector) -> CVector {
        &self.j * conj_vector(v)
    }

    /// Linear matrix of `J x J`.
    pub fn conjugate_by_j(&self, x: &CMatrix) -> CMatrix {
        &self.j * conj_matrix(x) * conj_matrix(&self.j)
    }

    pub fn summary(&self) -> ModularSummary {
        ModularSummary {
            dim: self.dim(),
            delta_spectrum: self.delta_spectrum.clone(),
            condition_number: self.condition_number,
            j: matrix_pairs(&self.j),
            cyclic_basis: self.cyclic_basis.iter().map(|v| v.iter().map(|z| [z.re, z.im]).collect()).collect(),
        }
    }
}

fn matrix_pairs(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    m.row_iter().map(|r| r.iter().map(|z| [z.re, z.im]).collect()).collect()
}

/// Serializable view of [`ModularData`] for cross-run comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModularSummary {
    pub dim: usize,
    pub delta_spectrum: Vec<f64>,
    pub condition_number: f64,
    /// Row-major `[re, im]` entries of the matrix of `J`.
    pub j: Vec<Vec<[f64; 2]>>,
    pub cyclic_basis: Vec<Vec<[f64; 2]>>,
}

/// Assembles `S_0: x Omega -> x^* Omega` on a basis of the algebra and
/// derives `Delta = S^* S` and `J = S Delta^{-1/2}`.
pub fn tomita(algebra: &MatrixAlgebra, omega: &CVector) -> Result<ModularData> {
    let d = algebra.size();
    if omega.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: omega.len() });
    }
    let orbit = |basis: &[CMatrix]| CMatrix::from_columns(&basis.iter().map(|x| x * omega).collect::<Vec<_>>());
    let cyc = orbit(algebra.basis());
    let cyclic_rank = rank(&cyc, RANK_TOL);
    if cyclic_rank < d {
        return Err(Error::NotCyclic { rank: cyclic_rank, dim: d });
    }
    let commutant = algebra.commutant();
    let sep_rank = rank(&orbit(commutant.basis()), RANK_TOL);
    if sep_rank < d {
        return Err(Error::NotSeparating { rank: sep_rank, dim: d });
    }
    if algebra.dim() != d {
        return Err(Error::Numerical(format!(
            "cyclic and separating vector requires algebra dimension {d}, found {}",
            algebra.dim()
        )));
    }

    let v = cyc;
    let w = CMatrix::from_columns(&algebra.basis().iter().map(|x| x.adjoint() * omega).collect::<Vec<_>>());
    let v_inv = v.clone().try_inverse().ok_or_else(|| Error::Numerical("orbit matrix is singular".into()))?;
    // S (V c) = W conj(c)  =>  S = W conj(V^{-1}) conj(.)
    let s = &w * conj_matrix(&v_inv);
    let delta_raw = s.transpose() * conj_matrix(&s);
    let delta = (&delta_raw + delta_raw.adjoint()).scale(0.5);
    let (spectrum, _) = hermitian_eigen(&delta);
    let smallest = spectrum.first().copied().unwrap_or(1.0);
    if smallest <= 0.0 {
        return Err(Error::Numerical(format!("Delta is not positive definite (min eigenvalue {smallest:.3e})")));
    }
    let largest = spectrum.last().copied().unwrap_or(1.0);
    let inv_sqrt = hermitian_fn(&delta, |x| C64::new(x.max(EIGEN_FLOOR).powf(-0.5), 0.0));
    let j = &s * conj_matrix(&inv_sqrt);
    Ok(ModularData {
        s,
        delta,
        j,
        omega: omega.clone(),
        cyclic_basis: (0..d).map(|i| v.column(i).into_owned()).collect(),
        condition_number: largest / smallest.max(EIGEN_FLOOR),
        delta_spectrum: spectrum,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModularReport {
    pub tol: f64,
    /// `‖S - J Delta^{1/2}‖`
    pub polar: f64,
    /// `max ‖S x Omega - x^* Omega‖` over the algebra basis
    pub s_action: f64,
    pub j_omega: f64,
    pub delta_omega: f64,
    pub j_involution: f64,
    pub delta_min_eigenvalue: f64,
    /// `max ‖[J x J, y]‖` over basis pairs
    pub j_commutant: f64,
    /// `max |ω(σ_t(x)) - ω(x)|` over basis and t-grid
    pub state_invariance: f64,
    /// `max dist(σ_t(x), M)` over basis and t-grid
    pub flow_invariance: f64,
    /// `max |<x^* Omega, Delta y Omega> - ω(y x)|` over basis pairs
    pub kms: f64,
    pub passed: bool,
}

/// Checks the defining identities of the modular objects. Report only.
pub fn modular_axioms_check(
    md: &ModularData,
    algebra: &MatrixAlgebra,
    omega: &CVector,
    t_grid: &[f64],
) -> ModularReport {
    let d = md.dim();
    let basis = algebra.basis();
    let delta_half = hermitian_fn(&md.delta, |x| C64::new(x.max(0.0).sqrt(), 0.0));
    let polar = (&md.s - &md.j * conj_matrix(&delta_half)).norm();
    let s_action = basis.iter().map(|x| (md.apply_s(&(x * omega)) - x.adjoint() * omega).norm()).fold(0.0, f64::max);
    let j_omega = (md.apply_j(omega) - omega).norm();
    let delta_omega = (&md.delta * omega - omega).norm();
    let j_involution = (&md.j * conj_matrix(&md.j) - CMatrix::identity(d, d)).norm();
    let (spec, _) = hermitian_eigen(&md.delta);
    let delta_min_eigenvalue = spec.first().copied().unwrap_or(0.0);

    let mut j_commutant: f64 = 0.0;
    let mut kms: f64 = 0.0;
    for x in basis {
        let jxj = md.conjugate_by_j(x);
        let x_star_omega = x.adjoint() * omega;
        for y in basis {
            j_commutant = j_commutant.max((&jxj * y - y * &jxj).norm());
            let lhs = x_star_omega.dotc(&(&md.delta * (y * omega)));
            let rhs = omega.dotc(&(y * x * omega));
            kms = kms.max((lhs - rhs).norm());
        }
    }
    let mut state_invariance: f64 = 0.0;
    let mut flow_invariance: f64 = 0.0;
    for &t in t_grid {
        let u = md.delta_it(t);
        for x in basis {
            let sx = &u * x * u.adjoint();
            state_invariance = state_invariance.max((omega.dotc(&(&sx * omega)) - omega.dotc(&(x * omega))).norm());
            flow_invariance = flow_invariance.max(algebra.distance(&sx));
        }
    }
    let tol = AXIOM_TOL;
    let passed =
        [polar, s_action, j_omega, delta_omega, j_involution, j_commutant, state_invariance, flow_invariance, kms]
            .iter()
            .all(|&r| r < tol)
            && delta_min_eigenvalue > 0.0;
    ModularReport {
        tol,
        polar,
        s_action,
        j_omega,
        delta_omega,
        j_involution,
        delta_min_eigenvalue,
        j_commutant,
        state_invariance,
        flow_invariance,
        kms,
        passed,
    }
}

/// `M_2 (x) 1` on `C^4` with `Omega = sqrt(l) e_0 (x) e_0 + sqrt(1 - l) e_1 (x) e_1`.
pub fn two_by_two_example(weight: f64) -> Result<(MatrixAlgebra, CVector)> {
    if !(weight > 0.0 && weight < 1.0) {
        return Err(Error::InvalidParameter { name: "weight", reason: format!("must lie in (0, 1), got {weight}") });
    }
    let mut omega = CVector::zeros(4);
    omega[0] = C64::new(weight.sqrt(), 0.0);
    omega[3] = C64::new((1.0 - weight).sqrt(), 0.0);
    Ok((MatrixAlgebra::amplified(2, 2), omega))
}
