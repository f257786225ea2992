use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::C64;

/// Minkowski product `a_0 b_0 - a_1 b_1`.
pub fn minkowski(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] - a[1] * b[1]
}

/// Mass-shell momentum `(m cosh θ, m sinh θ)`.
pub fn p_m(mass: f64, theta: f64) -> [f64; 2] {
    [mass * theta.cosh(), mass * theta.sinh()]
}

/// `sqrt(p_1^2 + m^2)`.
pub fn omega(mass: f64, p1: f64) -> f64 {
    p1.hypot(mass)
}

/// A function on momentum space given by its Fourier transform
/// `f̃(p) = (1/2π) ∫ d²a e^{i p·a} f(a)`.
pub trait TestFunction: Sync {
    fn mass(&self) -> f64;
    fn fourier(&self, p: [f64; 2]) -> C64;
}

/// Gaussian wave packet `f(a) = exp(-½ (a-c)ᵀ Σ⁻¹ (a-c)) e^{-i p̄·a}`, or
/// with `cos(p̄·a)` in place of the exponential when `real` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WavePacket2D {
    pub center: [f64; 2],
    /// Position-space covariance `Σ`, symmetric positive definite.
    pub covariance: [[f64; 2]; 2],
    pub modulation: [f64; 2],
    pub mass: f64,
    #[serde(default)]
    pub real: bool,
}

impl WavePacket2D {
    pub fn new(
        center: [f64; 2],
        covariance: [[f64; 2]; 2],
        modulation: [f64; 2],
        mass: f64,
        real: bool,
    ) -> Result<Self> {
        let p = WavePacket2D { center, covariance, modulation, mass, real };
        p.validate()?;
        Ok(p)
    }

    /// Isotropic packet of position width `width` whose modulation sits on
    /// the mass shell at `rapidity`.
    pub fn on_shell(mass: f64, rapidity: f64, center: [f64; 2], width: f64) -> Result<Self> {
        let w2 = width * width;
        Self::new(center, [[w2, 0.0], [0.0, w2]], p_m(mass, rapidity), mass, false)
    }

    /// On-shell packet moving with group velocity `velocity`.
    pub fn with_velocity(mass: f64, velocity: f64, center: [f64; 2], width: f64) -> Result<Self> {
        if !(velocity.abs() < 1.0) {
            return Err(Error::InvalidParameter {
                name: "velocity",
                reason: format!("must lie in (-1, 1), got {velocity}"),
            });
        }
        Self::on_shell(mass, velocity.atanh(), center, width)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0) {
            return Err(Error::InvalidParameter {
                name: "mass",
                reason: format!("must be positive, got {}", self.mass),
            });
        }
        let s = self.covariance;
        if (s[0][1] - s[1][0]).abs() > 1e-12 * (s[0][0].abs() + s[1][1].abs()) {
            return Err(Error::InvalidParameter { name: "covariance", reason: "must be symmetric".into() });
        }
        if !(s[0][0] > 0.0 && self.det() > 0.0) {
            return Err(Error::InvalidParameter { name: "covariance", reason: "must be positive definite".into() });
        }
        Ok(())
    }

    fn det(&self) -> f64 {
        let s = self.covariance;
        s[0][0] * s[1][1] - s[0][1] * s[1][0]
    }

    /// `(Σ⁻¹)_{11}`, the momentum-space variance of `p_1`.
    pub fn momentum_variance_p1(&self) -> f64 {
        self.covariance[0][0] / self.det()
    }

    fn envelope(&self, k: [f64; 2]) -> f64 {
        let s = self.covariance;
        (-0.5 * (k[0] * (s[0][0] * k[0] + s[0][1] * k[1]) + k[1] * (s[1][0] * k[0] + s[1][1] * k[1]))).exp()
    }

    fn single(&self, p: [f64; 2], pbar: [f64; 2]) -> C64 {
        let q = [p[0] - pbar[0], p[1] - pbar[1]];
        let k = [q[0], -q[1]];
        C64::from_polar(self.det().sqrt() * self.envelope(k), minkowski(q, self.center))
    }

    /// Position-space value.
    pub fn position(&self, a: [f64; 2]) -> C64 {
        let d = [a[0] - self.center[0], a[1] - self.center[1]];
        let s = self.covariance;
        let det = self.det();
        let inv = [[s[1][1] / det, -s[0][1] / det], [-s[1][0] / det, s[0][0] / det]];
        let quad = d[0] * (inv[0][0] * d[0] + inv[0][1] * d[1]) + d[1] * (inv[1][0] * d[0] + inv[1][1] * d[1]);
        let g = (-0.5 * quad).exp();
        let phase = minkowski(self.modulation, a);
        if self.real {
            C64::new(g * phase.cos(), 0.0)
        } else {
            C64::from_polar(g, -phase)
        }
    }
}

impl TestFunction for WavePacket2D {
    fn mass(&self) -> f64 {
        self.mass
    }

    fn fourier(&self, p: [f64; 2]) -> C64 {
        if self.real {
            let neg = [-self.modulation[0], -self.modulation[1]];
            (self.single(p, self.modulation) + self.single(p, neg)) * 0.5
        } else {
            self.single(p, self.modulation)
        }
    }
}

/// `f_t`, whose Fourier transform is `f̃(p) e^{i (p_0 - ω(p_1)) t}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeEvolved<F> {
    pub inner: F,
    pub t: f64,
}

impl<F: TestFunction> TestFunction for TimeEvolved<F> {
    fn mass(&self) -> f64 {
        self.inner.mass()
    }

    fn fourier(&self, p: [f64; 2]) -> C64 {
        let phase = (p[0] - omega(self.inner.mass(), p[1])) * self.t;
        self.inner.fourier(p) * C64::from_polar(1.0, phase)
    }
}
