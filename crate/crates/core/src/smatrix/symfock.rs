use crate::error::{Error, Result};
use crate::linalg::{CVector, C64};
use crate::par;

/// Symmetric Fock space over `C^size` truncated at `cap` particles.
/// Component `n` is stored as a full row-major tensor of rank `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymFock {
    size: usize,
    cap: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    pub components: Vec<CVector>,
}

impl FockState {
    pub fn norm(&self) -> f64 {
        self.components.iter().map(|c| c.norm_squared()).sum::<f64>().sqrt()
    }

    pub fn inner(&self, other: &FockState) -> C64 {
        self.components.iter().zip(&other.components).map(|(a, b)| a.dotc(b)).sum()
    }

    pub fn add(&self, other: &FockState) -> FockState {
        FockState { components: self.components.iter().zip(&other.components).map(|(a, b)| a + b).collect() }
    }

    pub fn scale(&self, z: C64) -> FockState {
        FockState { components: self.components.iter().map(|a| a * z).collect() }
    }

    pub fn particle_number_bound(&self) -> usize {
        self.components.iter().rposition(|c| c.iter().any(|z| *z != C64::new(0.0, 0.0))).unwrap_or(0)
    }
}

impl SymFock {
    pub fn new(size: usize, cap: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidParameter { name: "size", reason: "one-particle space must be nonzero".into() });
        }
        let total = (0..=cap as u32).try_fold(0usize, |acc, n| size.checked_pow(n).and_then(|d| acc.checked_add(d)));
        if total.is_none() {
            return Err(Error::CapExceeded(cap));
        }
        Ok(SymFock { size, cap })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn zero(&self) -> FockState {
        FockState { components: (0..=self.cap).map(|n| CVector::zeros(self.size.pow(n as u32))).collect() }
    }

    pub fn vacuum(&self) -> FockState {
        let mut s = self.zero();
        s.components[0][0] = C64::new(1.0, 0.0);
        s
    }

    /// One-particle state with coordinates `psi`.
    pub fn one_particle(&self, psi: &CVector) -> Result<FockState> {
        self.check(psi)?;
        if self.cap < 1 {
            return Err(Error::CapExceeded(self.cap));
        }
        let mut s = self.zero();
        s.components[1] = psi.clone();
        Ok(s)
    }

    fn check(&self, psi: &CVector) -> Result<()> {
        if psi.len() != self.size {
            return Err(Error::DimensionMismatch { expected: self.size, got: psi.len() });
        }
        Ok(())
    }

    fn check_state(&self, state: &FockState) -> Result<()> {
        if state.components.len() != self.cap + 1 {
            return Err(Error::DimensionMismatch { expected: self.cap + 1, got: state.components.len() });
        }
        Ok(())
    }

    /// `(z†(ψ)Ψ)_n = sqrt(n) P_n(ψ ⊗ Ψ_{n-1})`. The flag reports a nonzero
    /// top component whose image was dropped.
    pub fn create(&self, psi: &CVector, state: &FockState) -> Result<(FockState, bool)> {
        self.check(psi)?;
        self.check_state(state)?;
        let d = self.size;
        let truncated = state.components[self.cap].iter().any(|z| *z != C64::new(0.0, 0.0));
        let mut out = self.zero();
        for n in 1..=self.cap {
            let prev = &state.components[n - 1];
            let scale = (n as f64).sqrt() / n as f64;
            let values = par::map_range(d.pow(n as u32), |idx| {
                let mut acc = C64::new(0.0, 0.0);
                for j in 0..n {
                    let pow_after = d.pow((n - 1 - j) as u32);
                    let digit = (idx / pow_after) % d;
                    let rest = (idx / (pow_after * d)) * pow_after + idx % pow_after;
                    acc += psi[digit] * prev[rest];
                }
                acc * scale
            });
            out.components[n] = CVector::from_vec(values);
        }
        Ok((out, truncated))
    }

    /// `(z(ψ)Ψ)_{n-1} = sqrt(n) Σ_i conj(ψ_i) Ψ_n[i, ...]`, antilinear in `ψ`.
    pub fn annihilate(&self, psi: &CVector, state: &FockState) -> Result<FockState> {
        self.check(psi)?;
        self.check_state(state)?;
        let d = self.size;
        let mut out = self.zero();
        for n in 1..=self.cap {
            let block = d.pow(n as u32 - 1);
            let comp = &state.components[n];
            let scale = (n as f64).sqrt();
            let values =
                par::map_range(block, |r| (0..d).map(|i| psi[i].conj() * comp[i * block + r]).sum::<C64>() * scale);
            out.components[n - 1] = CVector::from_vec(values);
        }
        Ok(out)
    }

    /// `φ(f) = z†(f⁺) + z(J f⁻)` with `J` complex conjugation.
    pub fn field(&self, f_plus: &CVector, f_minus: &CVector, state: &FockState) -> Result<(FockState, bool)> {
        let (created, truncated) = self.create(f_plus, state)?;
        let annihilated = self.annihilate(&f_minus.map(|z| z.conj()), state)?;
        Ok((created.add(&annihilated), truncated))
    }

    /// Symmetric projection of a rank-`n` tensor.
    pub fn symmetrize(&self, n: usize, tensor: &CVector) -> Result<CVector> {
        let d = self.size;
        if tensor.len() != d.pow(n as u32) {
            return Err(Error::DimensionMismatch { expected: d.pow(n as u32), got: tensor.len() });
        }
        let perms = permutations(n);
        let values = par::map_range(tensor.len(), |idx| {
            let digits = to_digits(idx, d, n);
            perms.iter().map(|p| tensor[from_digits(&p.iter().map(|&k| digits[k]).collect::<Vec<_>>(), d)]).sum::<C64>()
                / perms.len() as f64
        });
        Ok(CVector::from_vec(values))
    }
}

fn to_digits(mut idx: usize, d: usize, n: usize) -> Vec<usize> {
    let mut digits = vec![0; n];
    for k in (0..n).rev() {
        digits[k] = idx % d;
        idx /= d;
    }
    digits
}

fn from_digits(digits: &[usize], d: usize) -> usize {
    digits.iter().fold(0, |acc, &x| acc * d + x)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random_vector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Random symmetric state with components up to `top` particles.
    fn random_state(fock: &SymFock, rng: &mut ChaCha8Rng, top: usize) -> FockState {
        let mut s = fock.zero();
        for n in 0..=top {
            s.components[n] = fock.symmetrize(n, &random_vector(rng, fock.size().pow(n as u32))).unwrap();
        }
        s
    }

    #[test]
    fn ccr_below_cap() {
        let fock = SymFock::new(5, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(70);
        for top in 0..3 {
            let state = random_state(&fock, &mut rng, top);
            let psi = random_vector(&mut rng, 5);
            let phi = random_vector(&mut rng, 5);
            let (a, _) = fock.create(&phi, &state).unwrap();
            let za = fock.annihilate(&psi, &a).unwrap();
            let b = fock.annihilate(&psi, &state).unwrap();
            let (zb, _) = fock.create(&phi, &b).unwrap();
            let commutator = za.add(&zb.scale(C64::new(-1.0, 0.0)));
            let expected = state.scale(psi.dotc(&phi));
            let diff = commutator.add(&expected.scale(C64::new(-1.0, 0.0)));
            assert!(diff.norm() < 1e-10, "top {top}: {}", diff.norm());
        }
    }

    #[test]
    fn creation_is_symmetric_and_adjoint_to_annihilation() {
        let fock = SymFock::new(4, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let phi_state = random_state(&fock, &mut rng, 2);
        let psi_state = random_state(&fock, &mut rng, 3);
        let psi = random_vector(&mut rng, 4);
        let (created, truncated) = fock.create(&psi, &phi_state).unwrap();
        assert!(!truncated);
        for n in 0..=3 {
            let c = &created.components[n];
            assert!((fock.symmetrize(n, c).unwrap() - c).norm() < 1e-12);
        }
        let lhs = created.inner(&psi_state);
        let rhs = phi_state.inner(&fock.annihilate(&psi, &psi_state).unwrap());
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn field_on_vacuum_and_truncation_flag() {
        let fock = SymFock::new(6, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(72);
        let fp = random_vector(&mut rng, 6);
        let fm = random_vector(&mut rng, 6);
        let (out, truncated) = fock.field(&fp, &fm, &fock.vacuum()).unwrap();
        assert!(!truncated);
        assert_eq!(out.components[1], fp);
        assert_eq!(out.components[0][0], C64::new(0.0, 0.0));
        let (back, truncated) = fock.field(&fp, &fm, &out).unwrap();
        assert!(truncated);
        assert!((back.components[0][0] - fm.iter().zip(fp.iter()).map(|(a, b)| a * b).sum::<C64>()).norm() < 1e-12);
    }

    #[test]
    fn two_particle_vector_from_creations() {
        let fock = SymFock::new(3, 2).unwrap();
        let a = CVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]);
        let b = CVector::from_vec(vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        let (one, _) = fock.create(&b, &fock.vacuum()).unwrap();
        let (two, _) = fock.create(&a, &one).unwrap();
        let c = &two.components[2];
        let s = 1.0 / 2f64.sqrt();
        assert!((c[1] - C64::new(s, 0.0)).norm() < 1e-15 && (c[3] - C64::new(s, 0.0)).norm() < 1e-15);
        assert!((two.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn oversized_cap_is_rejected() {
        assert!(matches!(SymFock::new(1 << 20, 8), Err(Error::CapExceeded(8))));
        assert!(SymFock::new(0, 1).is_err());
    }
}
