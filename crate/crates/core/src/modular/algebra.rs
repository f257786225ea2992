use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{extend_orthonormal, kron, mat_of, null_space, vec_of, CMatrix, CVector, C64};

/// Closure stops after this many rounds of pairwise products.
pub const MAX_CLOSURE_ROUNDS: usize = 10;
const SPAN_TOL: f64 = 1e-10;

/// Unital *-algebra of `d x d` matrices generated by a finite family.
/// The basis is orthonormal for the Hilbert-Schmidt inner product.
#[derive(Debug, Clone)]
pub struct MatrixAlgebra {
    size: usize,
    generators: Vec<CMatrix>,
    basis: Vec<CMatrix>,
}

impl MatrixAlgebra {
    pub fn generate(size: usize, generators: Vec<CMatrix>) -> Result<Self> {
        for g in &generators {
            if g.nrows() != size || g.ncols() != size {
                return Err(Error::DimensionMismatch { expected: size, got: g.nrows().max(g.ncols()) });
            }
        }
        let mut flat: Vec<CVector> = Vec::new();
        extend_orthonormal(&mut flat, &vec_of(&CMatrix::identity(size, size)), SPAN_TOL);
        for g in &generators {
            extend_orthonormal(&mut flat, &vec_of(g), SPAN_TOL);
            extend_orthonormal(&mut flat, &vec_of(&g.adjoint()), SPAN_TOL);
        }
        let mut stable = false;
        for _ in 0..MAX_CLOSURE_ROUNDS {
            let current: Vec<CMatrix> = flat.iter().map(|v| mat_of(v, size, size)).collect();
            let before = flat.len();
            for a in &current {
                for b in &current {
                    extend_orthonormal(&mut flat, &vec_of(&(a * b)), SPAN_TOL);
                }
            }
            if flat.len() == before {
                stable = true;
                break;
            }
        }
        if !stable {
            return Err(Error::ClosureDiverged(MAX_CLOSURE_ROUNDS));
        }
        let basis = flat.iter().map(|v| mat_of(v, size, size)).collect();
        Ok(Self { size, generators, basis })
    }

    /// The full matrix algebra `M_d`.
    pub fn full(size: usize) -> Self {
        let basis = (0..size * size)
            .map(|k| {
                let mut m = CMatrix::zeros(size, size);
                m[(k % size, k / size)] = C64::new(1.0, 0.0);
                m
            })
            .collect();
        Self { size, generators: Vec::new(), basis }
    }

    /// `M_d (x) 1_m` acting on `C^d (x) C^m`.
    pub fn amplified(size: usize, multiplicity: usize) -> Self {
        let gens =
            Self::full(size).basis.iter().map(|e| kron(e, &CMatrix::identity(multiplicity, multiplicity))).collect();
        Self::generate(size * multiplicity, gens).expect("amplified full algebra closes in one round")
    }

    /// Matrix size `d`.
    pub fn size(&self) -> usize {
        self.size
    }

    /// Dimension of the algebra as a vector space.
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn generators(&self) -> &[CMatrix] {
        &self.generators
    }

    pub fn basis(&self) -> &[CMatrix] {
        &self.basis
    }

    /// Orthogonal projection of `x` onto the algebra (Hilbert-Schmidt).
    pub fn project(&self, x: &CMatrix) -> CMatrix {
        let mut p = CMatrix::zeros(self.size, self.size);
        for b in &self.basis {
            let coef = b.iter().zip(x.iter()).map(|(u, v)| u.conj() * v).sum::<C64>();
            p += b * coef;
        }
        p
    }

    /// Hilbert-Schmidt distance from `x` to the algebra.
    pub fn distance(&self, x: &CMatrix) -> f64 {
        (x - self.project(x)).norm()
    }

    pub fn contains(&self, x: &CMatrix, tol: f64) -> bool {
        self.distance(x) <= tol * x.norm().max(1.0)
    }

    /// Largest relative distance of a basis element of `other` from `self`.
    pub fn inclusion_residual(&self, other: &MatrixAlgebra) -> f64 {
        other.basis.iter().map(|b| self.distance(b)).fold(0.0, f64::max)
    }

    /// Commutant `{y : [y, x] = 0 for all x}` inside `M_d`.
    pub fn commutant(&self) -> MatrixAlgebra {
        let d = self.size;
        let id = CMatrix::identity(d, d);
        let rows = self.basis.len() * d * d;
        let mut system = CMatrix::zeros(rows.max(1), d * d);
        for (k, a) in self.basis.iter().enumerate() {
            // vec(AX - XA) = (1 (x) A - A^T (x) 1) vec(X), column-major
            let block = kron(&id, a) - kron(&a.transpose(), &id);
            system.view_mut((k * d * d, 0), (d * d, d * d)).copy_from(&block);
        }
        let kernel = null_space(&system, 1e-10);
        let mut flat = Vec::new();
        for col in kernel.column_iter() {
            extend_orthonormal(&mut flat, &col.into_owned(), SPAN_TOL);
        }
        let basis = flat.iter().map(|v| mat_of(v, d, d)).collect();
        MatrixAlgebra { size: d, generators: Vec::new(), basis }
    }

    /// Random element with complex Gaussian coordinates in the basis.
    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> CMatrix {
        let mut x = CMatrix::zeros(self.size, self.size);
        for b in &self.basis {
            x += b * C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
        }
        x
    }
}
