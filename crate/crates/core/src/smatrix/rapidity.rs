use serde::{Deserialize, Serialize};

use super::packet::{omega, p_m, TestFunction, WavePacket2D};
use crate::error::{Error, Result};
use crate::linalg::{CVector, C64};
use crate::par;

/// Largest admissible fraction of L² mass in the outer grid cells.
pub const EDGE_MASS_TOL: f64 = 1e-6;
/// Fraction of the grid (per side) counted as edge region.
pub const EDGE_FRACTION: f64 = 0.01;
/// Relative amplitude defining the support interval of a sampled function.
pub const SUPPORT_TOL: f64 = 1e-6;
pub const DEFAULT_VELOCITY_THRESHOLD: f64 = 1e-4;

/// Uniform rapidity grid `θ_i = min + i h`, `i = 0..points`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RapidityGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Default for RapidityGrid {
    fn default() -> Self {
        RapidityGrid { min: -6.0, max: 6.0, points: 2048 }
    }
}

impl RapidityGrid {
    pub fn new(min: f64, max: f64, points: usize) -> Result<Self> {
        let g = RapidityGrid { min, max, points };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min < self.max) || !self.min.is_finite() || !self.max.is_finite() {
            return Err(Error::InvalidParameter {
                name: "grid",
                reason: format!("need finite min < max, got [{}, {}]", self.min, self.max),
            });
        }
        if self.points < 2 {
            return Err(Error::InvalidParameter {
                name: "grid",
                reason: format!("need at least 2 points, got {}", self.points),
            });
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        (self.max - self.min) / (self.points - 1) as f64
    }

    pub fn theta(&self, i: usize) -> f64 {
        self.min + i as f64 * self.step()
    }

    pub fn thetas(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.theta(i)).collect()
    }

    /// Trapezoid weights.
    pub fn weights(&self) -> Vec<f64> {
        let h = self.step();
        (0..self.points).map(|i| if i == 0 || i + 1 == self.points { 0.5 * h } else { h }).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Plus,
    Minus,
}

/// Samples of `f^±(θ) = f̃(±p_m(θ))` on a rapidity grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RapidityFunction {
    pub grid: RapidityGrid,
    pub values: CVector,
    /// `[θ_first, θ_last]` where `|value| > SUPPORT_TOL · max|value|`.
    pub support: Option<(f64, f64)>,
    /// Fraction of L² mass in the outer grid cells.
    pub edge_mass: f64,
}

impl RapidityFunction {
    pub fn from_values(grid: RapidityGrid, values: CVector) -> Result<Self> {
        grid.validate()?;
        if values.len() != grid.points {
            return Err(Error::DimensionMismatch { expected: grid.points, got: values.len() });
        }
        let peak = values.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let support = if peak > 0.0 {
            let inside: Vec<usize> = (0..values.len()).filter(|&i| values[i].norm() > SUPPORT_TOL * peak).collect();
            Some((grid.theta(inside[0]), grid.theta(*inside.last().unwrap())))
        } else {
            None
        };
        let w = grid.weights();
        let mass: Vec<f64> = values.iter().zip(&w).map(|(z, w)| w * z.norm_sqr()).collect();
        let total: f64 = mass.iter().sum();
        let edge = ((grid.points as f64 * EDGE_FRACTION).ceil() as usize).max(1).min(grid.points / 2);
        let edge_sum: f64 = mass[..edge].iter().chain(&mass[grid.points - edge..]).sum();
        let edge_mass = if total > 0.0 { edge_sum / total } else { 0.0 };
        Ok(RapidityFunction { grid, values, support, edge_mass })
    }

    /// Trapezoid L² norm.
    pub fn norm(&self) -> f64 {
        self.inner(self).re.sqrt()
    }

    /// Trapezoid `⟨self, other⟩`, antilinear in `self`.
    pub fn inner(&self, other: &RapidityFunction) -> C64 {
        self.grid
            .weights()
            .iter()
            .zip(self.values.iter().zip(other.values.iter()))
            .map(|(w, (a, b))| a.conj() * b * *w)
            .sum()
    }

    /// Coordinates `sqrt(w_i) f(θ_i)`, in which the trapezoid inner
    /// product is Euclidean.
    pub fn coordinates(&self) -> CVector {
        let w = self.grid.weights();
        CVector::from_iterator(self.values.len(), self.values.iter().zip(&w).map(|(z, w)| z * w.sqrt()))
    }

    pub fn conj(&self) -> RapidityFunction {
        RapidityFunction { values: self.values.map(|z| z.conj()), ..self.clone() }
    }

    /// Index of the sample with largest modulus.
    pub fn argmax(&self) -> usize {
        (0..self.values.len()).max_by(|&a, &b| self.values[a].norm().total_cmp(&self.values[b].norm())).unwrap_or(0)
    }
}

/// Closed-form `f^±` on the grid.
pub fn rapidity_transform(f: &dyn TestFunction, sign: Sign, grid: RapidityGrid) -> Result<RapidityFunction> {
    grid.validate()?;
    let m = f.mass();
    if !(m > 0.0) {
        return Err(Error::InvalidParameter { name: "mass", reason: format!("must be positive, got {m}") });
    }
    let s = match sign {
        Sign::Plus => 1.0,
        Sign::Minus => -1.0,
    };
    let values = par::map_range(grid.points, |i| {
        let p = p_m(m, grid.theta(i));
        f.fourier([s * p[0], s * p[1]])
    });
    let out = RapidityFunction::from_values(grid, CVector::from_vec(values))?;
    if out.edge_mass > EDGE_MASS_TOL {
        return Err(Error::GridTooSmall { edge_mass: out.edge_mass });
    }
    Ok(out)
}

/// Velocity interval `{p_1 / ω(p) : |f̃(p)| > threshold · max|f̃|}`. For a
/// real packet only the component modulated at `+p̄` is used.
pub fn velocity_support(f: &WavePacket2D, threshold: f64) -> Result<(f64, f64)> {
    f.validate()?;
    if !(threshold > 0.0) {
        return Err(Error::InvalidParameter {
            name: "threshold",
            reason: format!("must be positive, got {threshold}"),
        });
    }
    if threshold >= 1.0 {
        return Err(Error::EmptySupport(threshold));
    }
    let r = (2.0 * (1.0 / threshold).ln()).sqrt();
    let half = r * f.momentum_variance_p1().sqrt();
    let v = |p1: f64| p1 / omega(f.mass, p1);
    Ok((v(f.modulation[1] - half), v(f.modulation[1] + half)))
}

/// `Γ(g) ≺ Γ(f)`: every velocity of `f` strictly exceeds every velocity of `g`.
pub fn precedes(g: &WavePacket2D, f: &WavePacket2D) -> Result<bool> {
    precedes_at(g, f, DEFAULT_VELOCITY_THRESHOLD)
}

pub fn precedes_at(g: &WavePacket2D, f: &WavePacket2D, threshold: f64) -> Result<bool> {
    let (_, g_max) = velocity_support(g, threshold)?;
    let (f_min, _) = velocity_support(f, threshold)?;
    Ok(f_min > g_max)
}
