use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{conj_matrix, extend_orthonormal, CMatrix, CVector, C64};

pub type Label = usize;

const UNIT_TOL: f64 = 1e-12;

/// A finite-dimensional Hilbert space with a distinguished unit vector.
///
/// The adapted basis puts `omega` first and follows it with an orthonormal
/// basis of its orthogonal complement, obtained by Gram-Schmidt of the
/// standard basis with the vector of largest overlap with `omega` left out.
#[derive(Debug, Clone)]
pub struct SeedSpace {
    label: Label,
    omega: CVector,
    /// Columns: omega, then the reduced basis.
    basis: CMatrix,
}

impl SeedSpace {
    pub fn new(label: Label, omega: CVector) -> Result<Self> {
        let dim = omega.len();
        if dim < 1 {
            return Err(Error::InvalidSeed { label, reason: "dimension must be at least 1".into() });
        }
        let norm = omega.norm();
        if (norm - 1.0).abs() > UNIT_TOL {
            return Err(Error::InvalidSeed { label, reason: format!("omega has norm {norm}, expected 1") });
        }
        let pivot = (0..dim).max_by(|&a, &b| omega[a].norm().total_cmp(&omega[b].norm())).unwrap_or(0);
        let mut cols = vec![omega.clone()];
        for i in (0..dim).filter(|&i| i != pivot) {
            let e = CVector::from_fn(dim, |r, _| if r == i { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
            if !extend_orthonormal(&mut cols, &e, 1e-10) {
                return Err(Error::Numerical(format!("Gram-Schmidt degenerated for seed {label}")));
            }
        }
        let basis = CMatrix::from_columns(&cols);
        Ok(Self { label, omega, basis })
    }

    /// `C^dim` with `omega = e_0`.
    pub fn standard(label: Label, dim: usize) -> Result<Self> {
        if dim < 1 {
            return Err(Error::InvalidSeed { label, reason: "dimension must be at least 1".into() });
        }
        let mut omega = CVector::zeros(dim);
        omega[0] = C64::new(1.0, 0.0);
        Self::new(label, omega)
    }

    pub fn label(&self) -> Label {
        self.label
    }

    pub fn dim(&self) -> usize {
        self.omega.len()
    }

    pub fn reduced_dim(&self) -> usize {
        self.dim() - 1
    }

    pub fn omega(&self) -> &CVector {
        &self.omega
    }

    /// Unitary whose first column is omega and whose remaining columns span
    /// the reduced space.
    pub fn adapted_basis(&self) -> &CMatrix {
        &self.basis
    }

    pub fn reduced_basis(&self) -> Vec<CVector> {
        (1..self.dim()).map(|j| self.basis.column(j).into_owned()).collect()
    }

    /// `<omega, T omega>`.
    pub fn state(&self, t: &CMatrix) -> C64 {
        self.omega.dotc(&(t * &self.omega))
    }

    /// Matrix of a linear operator in the adapted basis.
    pub fn to_adapted(&self, t: &CMatrix) -> CMatrix {
        self.basis.adjoint() * t * &self.basis
    }

    /// Matrix of the antilinear operator `v -> m conj(v)` in the adapted
    /// basis, again in the form `c -> m_hat conj(c)`.
    pub fn to_adapted_antilinear(&self, m: &CMatrix) -> CMatrix {
        self.basis.adjoint() * m * conj_matrix(&self.basis)
    }

    /// Coordinates of `v` in the adapted basis.
    pub fn coordinates(&self, v: &CVector) -> CVector {
        self.basis.adjoint() * v
    }

    pub(crate) fn check_dim(&self, t: &CMatrix) -> Result<()> {
        let d = self.dim();
        if t.nrows() != d || t.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, got: t.nrows().max(t.ncols()) });
        }
        Ok(())
    }

    pub fn descriptor(&self) -> SeedDescriptor {
        SeedDescriptor { label: self.label, dim: self.dim(), omega: self.omega.iter().map(|z| [z.re, z.im]).collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedDescriptor {
    pub label: Label,
    pub dim: usize,
    /// Omega coordinates as `[re, im]` pairs.
    pub omega: Vec<[f64; 2]>,
}

impl SeedDescriptor {
    pub fn build(&self) -> Result<SeedSpace> {
        if self.omega.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: self.omega.len() });
        }
        let omega = CVector::from_iterator(self.dim, self.omega.iter().map(|p| C64::new(p[0], p[1])));
        SeedSpace::new(self.label, omega)
    }
}
