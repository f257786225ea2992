use std::io::Write;

use serde::{Deserialize, Serialize};

use super::packet::WavePacket2D;
use super::rapidity::{precedes, rapidity_transform, RapidityFunction, RapidityGrid, Sign};
use crate::error::{Error, Result};
use crate::fock::{lambda_act, rho_act, FockSpace, Label, SeedSpace, Word};
use crate::linalg::{CMatrix, CVector, C64};
use crate::par;

/// Largest admissible mass fraction on the wrong side of the diagonal.
pub const DOMAIN_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    In,
    Out,
}

/// Two-particle amplitude `ψ(θ_1, θ_2)` in the sector `(k_1, k_2)`, where
/// the first variable belongs to `k_1`. A diagonal state lives in the
/// symmetric two-particle space of a single copy.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoParticleState {
    pub sector: (Label, Label),
    pub grid: RapidityGrid,
    /// `amplitude[(i, j)] = ψ(θ_i, θ_j)`.
    pub amplitude: CMatrix,
    /// Fraction of `‖ψ‖²` on `{θ_1 < θ_2}`.
    pub mass_below: f64,
    /// Fraction of `‖ψ‖²` on `{θ_1 > θ_2}`.
    pub mass_above: f64,
}

impl TwoParticleState {
    pub fn new(sector: (Label, Label), grid: RapidityGrid, amplitude: CMatrix) -> Result<Self> {
        grid.validate()?;
        if amplitude.nrows() != grid.points || amplitude.ncols() != grid.points {
            return Err(Error::DimensionMismatch {
                expected: grid.points,
                got: amplitude.nrows().max(amplitude.ncols()),
            });
        }
        let w = grid.weights();
        let (mut below, mut above, mut total) = (0.0, 0.0, 0.0);
        for j in 0..grid.points {
            for i in 0..grid.points {
                let m = w[i] * w[j] * amplitude[(i, j)].norm_sqr();
                total += m;
                if i < j {
                    below += m;
                } else if i > j {
                    above += m;
                }
            }
        }
        let frac = |x: f64| if total > 0.0 { x / total } else { 0.0 };
        Ok(TwoParticleState { sector, grid, amplitude, mass_below: frac(below), mass_above: frac(above) })
    }

    pub fn is_diagonal(&self) -> bool {
        self.sector.0 == self.sector.1
    }

    /// Trapezoid inner product, zero between different sectors.
    pub fn inner(&self, other: &TwoParticleState) -> C64 {
        if self.sector != other.sector || self.grid != other.grid {
            return C64::new(0.0, 0.0);
        }
        let w = self.grid.weights();
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..self.grid.points {
            for i in 0..self.grid.points {
                acc += self.amplitude[(i, j)].conj() * other.amplitude[(i, j)] * (w[i] * w[j]);
            }
        }
        acc
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).re.sqrt()
    }

    /// Embeds a cross-sector amplitude into `fock`, using coordinates
    /// `sqrt(w_i w_j) ψ(θ_i, θ_j)` on the sector tensor.
    pub fn to_fock_vector(&self, fock: &FockSpace) -> Result<CVector> {
        if self.is_diagonal() {
            return Err(Error::InvalidParameter {
                name: "sector",
                reason: "diagonal states are not word vectors".into(),
            });
        }
        let word = Word(vec![self.sector.0, self.sector.1]);
        let sector = fock.sector(&word).ok_or(Error::UnknownLabel(self.sector.0))?;
        let n = self.grid.points;
        if sector.shape != [n, n] {
            return Err(Error::DimensionMismatch { expected: n * n, got: sector.dim });
        }
        let w = self.grid.weights();
        let mut v = CVector::zeros(fock.total_dim());
        for i in 0..n {
            for j in 0..n {
                v[sector.offset + i * n + j] = self.amplitude[(i, j)] * (w[i] * w[j]).sqrt();
            }
        }
        Ok(v)
    }

    /// Rows `theta1,theta2,re,im`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Numerical(format!("csv: {e}"));
        wtr.write_record(["theta1", "theta2", "re", "im"]).map_err(io)?;
        for i in 0..self.grid.points {
            for j in 0..self.grid.points {
                let z = self.amplitude[(i, j)];
                wtr.serialize((self.grid.theta(i), self.grid.theta(j), z.re, z.im)).map_err(io)?;
            }
        }
        wtr.flush().map_err(|e| Error::Numerical(format!("csv: {e}")))
    }
}

fn outer(a: &CVector, b: &CVector) -> CMatrix {
    let n = a.len();
    let cols = par::map_range(n, |j| a * b[j]);
    CMatrix::from_columns(&cols)
}

/// Closed-form asymptotic two-particle state of `f` (copy `k`) and `g`
/// (copy `k2`). Cross sectors: out is `f⁺ ⊗ g⁺` in `(k, k2)`, in is
/// `g⁺ ⊗ f⁺` in `(k2, k)`. Diagonal: the symmetric vector
/// `(f⁺ ⊗ g⁺ + g⁺ ⊗ f⁺)/sqrt(2)` for both directions.
pub fn scattering_state(
    direction: Direction,
    k: Label,
    k2: Label,
    f: &WavePacket2D,
    g: &WavePacket2D,
    grid: RapidityGrid,
) -> Result<TwoParticleState> {
    if !precedes(g, f)? {
        return Err(Error::PrecedenceViolated);
    }
    let fp = rapidity_transform(f, Sign::Plus, grid)?.values;
    let gp = rapidity_transform(g, Sign::Plus, grid)?.values;
    if k == k2 {
        let sym = (outer(&fp, &gp) + outer(&gp, &fp)) / C64::new(2f64.sqrt(), 0.0);
        return TwoParticleState::new((k, k), grid, sym);
    }
    match direction {
        Direction::Out => TwoParticleState::new((k, k2), grid, outer(&fp, &gp)),
        Direction::In => TwoParticleState::new((k2, k), grid, outer(&gp, &fp)),
    }
}

/// Two-particle S-matrix: identity on diagonal sectors; on cross sectors
/// `ψ(θ_1, θ_2) ↦ ψ(θ_2, θ_1)` with the sector swapped, defined for
/// amplitudes supported in `{θ_1 ≥ θ_2}`.
pub fn smatrix_apply(state: &TwoParticleState) -> Result<TwoParticleState> {
    if state.is_diagonal() {
        return Ok(state.clone());
    }
    if state.mass_below > DOMAIN_TOL {
        return Err(Error::OutsideDomain { fraction: state.mass_below });
    }
    flip(state)
}

/// Inverse of [`smatrix_apply`], defined for amplitudes supported in
/// `{θ_1 ≤ θ_2}`.
pub fn smatrix_inverse(state: &TwoParticleState) -> Result<TwoParticleState> {
    if state.is_diagonal() {
        return Ok(state.clone());
    }
    if state.mass_above > DOMAIN_TOL {
        return Err(Error::OutsideDomain { fraction: state.mass_above });
    }
    flip(state)
}

fn flip(state: &TwoParticleState) -> Result<TwoParticleState> {
    TwoParticleState::new((state.sector.1, state.sector.0), state.grid, state.amplitude.transpose())
}

/// Fraction of the mass of `f⁺ ⊗ g⁺` on `{θ_1 < θ_2}`.
pub fn support_fraction(f_plus: &RapidityFunction, g_plus: &RapidityFunction) -> f64 {
    let w = f_plus.grid.weights();
    let fm: Vec<f64> = f_plus.values.iter().zip(&w).map(|(z, w)| w * z.norm_sqr()).collect();
    let gm: Vec<f64> = g_plus.values.iter().zip(&w).map(|(z, w)| w * z.norm_sqr()).collect();
    let total = fm.iter().sum::<f64>() * gm.iter().sum::<f64>();
    if total == 0.0 {
        return 0.0;
    }
    let mut g_after: f64 = 0.0;
    let mut below = 0.0;
    for i in (0..fm.len()).rev() {
        below += fm[i] * g_after;
        g_after += gm[i];
    }
    below / total
}

/// [`support_fraction`] for packets, requiring `Γ(g) ≺ Γ(f)`.
pub fn support_condition_check(f: &WavePacket2D, g: &WavePacket2D, grid: RapidityGrid) -> Result<f64> {
    if !precedes(g, f)? {
        return Err(Error::PrecedenceViolated);
    }
    let fp = rapidity_transform(f, Sign::Plus, grid)?;
    let gp = rapidity_transform(g, Sign::Plus, grid)?;
    Ok(support_fraction(&fp, &gp))
}

/// Free product of two copies of the free field, each truncated to the
/// vacuum and the one-particle space on a rapidity grid.
#[derive(Debug, Clone)]
pub struct FieldCopies {
    pub fock: FockSpace,
    pub grid: RapidityGrid,
    pub labels: (Label, Label),
}

impl FieldCopies {
    pub fn new(grid: RapidityGrid, labels: (Label, Label)) -> Result<Self> {
        grid.validate()?;
        let seeds = [labels.0, labels.1]
            .iter()
            .map(|&l| SeedSpace::standard(l, grid.points + 1))
            .collect::<Result<Vec<_>>>()?;
        Ok(FieldCopies { fock: FockSpace::new(seeds, 2)?, grid, labels })
    }

    /// `φ(f)` on `C Ω ⊕ H_1`: column 0 carries `f⁺`, row 0 carries the
    /// annihilation part `z(J f⁻)`.
    pub fn field_matrix(&self, f: &WavePacket2D) -> Result<CMatrix> {
        let n = self.grid.points;
        let plus = rapidity_transform(f, Sign::Plus, self.grid)?.coordinates();
        let minus = rapidity_transform(f, Sign::Minus, self.grid)?.coordinates();
        let mut m = CMatrix::zeros(n + 1, n + 1);
        for i in 0..n {
            m[(i + 1, 0)] = plus[i];
            m[(0, i + 1)] = minus[i];
        }
        Ok(m)
    }

    /// Out: `ρ_{k2}(φ(g)) λ_k(φ(f)) Ω`. In: `λ_{k2}(φ(g)) ρ_k(φ(f)) Ω`.
    pub fn scattering_vector(
        &self,
        direction: Direction,
        k: Label,
        k2: Label,
        f: &WavePacket2D,
        g: &WavePacket2D,
    ) -> Result<CVector> {
        let phi_f = self.field_matrix(f)?;
        let phi_g = self.field_matrix(g)?;
        let omega = self.fock.vacuum();
        let (v, exact) = match direction {
            Direction::Out => {
                let (a, e1) = lambda_act(&self.fock, k, &phi_f, &omega)?;
                let (b, e2) = rho_act(&self.fock, k2, &phi_g, &a)?;
                (b, e1 && e2)
            }
            Direction::In => {
                let (a, e1) = rho_act(&self.fock, k, &phi_f, &omega)?;
                let (b, e2) = lambda_act(&self.fock, k2, &phi_g, &a)?;
                (b, e1 && e2)
            }
        };
        if !exact {
            return Err(Error::Inexact { len: 2, max_len: self.fock.max_len() });
        }
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn packets() -> (WavePacket2D, WavePacket2D) {
        let f = WavePacket2D::with_velocity(1.0, 0.25, [0.0, 0.0], 20.0).unwrap();
        let g = WavePacket2D::with_velocity(1.0, -0.25, [0.0, 0.0], 20.0).unwrap();
        (f, g)
    }

    fn coarse() -> RapidityGrid {
        RapidityGrid::new(-3.0, 3.0, 48).unwrap()
    }

    #[test]
    fn out_state_matches_lambda_rho_evaluation() {
        let (f, g) = packets();
        let grid = RapidityGrid::new(-2.0, 2.0, 40).unwrap();
        let copies = FieldCopies::new(grid, (1, 2)).unwrap();
        for dir in [Direction::Out, Direction::In] {
            let closed = scattering_state(dir, 1, 2, &f, &g, grid).unwrap();
            let direct = copies.scattering_vector(dir, 1, 2, &f, &g).unwrap();
            let embedded = closed.to_fock_vector(&copies.fock).unwrap();
            assert!((direct - embedded).norm() < 1e-10 * closed.norm().max(1.0));
        }
    }

    #[test]
    fn in_and_out_are_orthogonal_and_related_by_s() {
        let (f, g) = packets();
        let out = scattering_state(Direction::Out, 1, 2, &f, &g, coarse()).unwrap();
        let inn = scattering_state(Direction::In, 1, 2, &f, &g, coarse()).unwrap();
        assert_eq!(out.inner(&inn), C64::new(0.0, 0.0));
        let s_out = smatrix_apply(&out).unwrap();
        assert_eq!(s_out, inn);
        assert!((s_out.norm() - out.norm()).abs() < 1e-10 * out.norm());
        let back = smatrix_inverse(&s_out).unwrap();
        assert!((back.amplitude - &out.amplitude).norm() < 1e-10);
        assert!(matches!(smatrix_apply(&inn), Err(Error::OutsideDomain { .. })));
    }

    #[test]
    fn diagonal_sector_is_invariant() {
        let (f, g) = packets();
        let out = scattering_state(Direction::Out, 1, 1, &f, &g, coarse()).unwrap();
        let inn = scattering_state(Direction::In, 1, 1, &f, &g, coarse()).unwrap();
        assert_eq!(out, inn);
        assert_eq!(smatrix_apply(&out).unwrap(), out);
    }

    #[test]
    fn precedence_is_enforced() {
        let (f, g) = packets();
        assert!(matches!(scattering_state(Direction::Out, 1, 2, &g, &f, coarse()), Err(Error::PrecedenceViolated)));
        assert!(matches!(support_condition_check(&f, &f, coarse()), Err(Error::PrecedenceViolated)));
    }

    #[test]
    fn support_fraction_matches_direct_sum_and_decreases() {
        let grid = RapidityGrid::new(-3.0, 3.0, 120).unwrap();
        let mut last = f64::INFINITY;
        for v in [0.02, 0.05, 0.1, 0.2] {
            let f = WavePacket2D::with_velocity(1.0, v, [0.0, 0.0], 8.0).unwrap();
            let g = WavePacket2D::with_velocity(1.0, -v, [0.0, 0.0], 8.0).unwrap();
            let fp = rapidity_transform(&f, Sign::Plus, grid).unwrap();
            let gp = rapidity_transform(&g, Sign::Plus, grid).unwrap();
            let frac = support_fraction(&fp, &gp);
            let state = TwoParticleState::new((1, 2), grid, outer(&fp.values, &gp.values)).unwrap();
            assert!((frac - state.mass_below).abs() < 1e-12);
            assert!(frac <= last);
            last = frac;
        }
    }

    #[test]
    fn csv_export_has_one_row_per_grid_pair() {
        let grid = RapidityGrid::new(-2.0, 2.0, 6).unwrap();
        let out = TwoParticleState::new((1, 2), grid, CMatrix::identity(6, 6)).unwrap();
        let mut buf = Vec::new();
        out.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 37);
    }
}
