//! Left and right actions of seed operators on the truncated free product.

use super::seed::Label;
use super::space::{FockSpace, Word};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector, C64};
use crate::par;

/// Relative size below which a component pushed past `max_len` counts as zero.
pub const DROP_TOL: f64 = 1e-13;

/// Left action `lambda_kappa(T) v`.
///
/// On a sector whose first letter differs from `label` the operator
/// prepends `(T Omega)°` and multiplies by `<Omega, T Omega>`; on a sector
/// starting with `label` it acts on the first tensor factor, splitting the
/// result into its vacuum part (which shortens the word) and its reduced
/// part. Components that would exceed `max_len` are dropped and reported
/// through the returned flag.
pub fn lambda_act(fock: &FockSpace, label: Label, t: &CMatrix, v: &CVector) -> Result<(CVector, bool)> {
    fock.check_vector(v)?;
    let seed = fock.seed(label)?;
    seed.check_dim(t)?;
    let r = seed.reduced_dim();
    let hat = seed.to_adapted(t);
    let scalar = hat[(0, 0)];
    let col: Vec<C64> = (0..r).map(|i| hat[(i + 1, 0)]).collect();
    let row: Vec<C64> = (0..r).map(|j| hat[(0, j + 1)]).collect();
    let inner = hat.view((1, 1), (r, r)).into_owned();
    let x = v.as_slice();
    let sectors = fock.sectors();

    let blocks: Vec<Vec<C64>> = par::map_range(sectors.len(), |ti| {
        let target = &sectors[ti];
        let dim = target.dim;
        let mut out = vec![C64::new(0.0, 0.0); dim];
        if dim == 0 {
            return out;
        }
        match target.word.first() {
            None => {
                out[0] = scalar * x[0];
                if let Some(src) = fock.sector(&Word(vec![label])) {
                    let xs = &x[src.range()];
                    out[0] += row.iter().zip(xs).map(|(a, b)| a * b).sum::<C64>();
                }
            }
            Some(first) if first != label => {
                let xt = &x[target.range()];
                for (o, xi) in out.iter_mut().zip(xt) {
                    *o = scalar * xi;
                }
                if let Some(src) = fock.sector(&target.word.prepend(label)) {
                    let xs = &x[src.range()];
                    for (b, rb) in row.iter().enumerate() {
                        for j in 0..dim {
                            out[j] += rb * xs[b * dim + j];
                        }
                    }
                }
            }
            Some(_) => {
                let tail_dim = dim / r;
                let tail = fock.sector(&target.word.tail()).expect("tail of a sector is a sector");
                let xtail = &x[tail.range()];
                let xt = &x[target.range()];
                for i in 0..r {
                    for j in 0..tail_dim {
                        let mut acc = col[i] * xtail[j];
                        for b in 0..r {
                            acc += inner[(i, b)] * xt[b * tail_dim + j];
                        }
                        out[i * tail_dim + j] = acc;
                    }
                }
            }
        }
        out
    });

    let col_norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let dropped = sectors
        .iter()
        .filter(|s| s.word.len() == fock.max_len() && s.word.first() != Some(label))
        .map(|s| {
            let xs = &x[s.range()];
            xs.iter().map(|z| z.norm_sqr()).sum::<f64>()
        })
        .sum::<f64>()
        .sqrt()
        * col_norm;
    let scale = hat.norm() * v.norm();
    let exact = dropped <= DROP_TOL * scale;

    let out = CVector::from_iterator(fock.total_dim(), blocks.into_iter().flatten());
    Ok((out, exact))
}

/// Right action `rho_kappa(T) = Z lambda_kappa(T) Z`.
pub fn rho_act(fock: &FockSpace, label: Label, t: &CMatrix, v: &CVector) -> Result<(CVector, bool)> {
    let zv = z_involution(fock, v)?;
    let (w, exact) = lambda_act(fock, label, t, &zv)?;
    Ok((z_involution(fock, &w)?, exact))
}

/// The unitary involution reversing every word and its tensor factors.
pub fn z_involution(fock: &FockSpace, v: &CVector) -> Result<CVector> {
    fock.check_vector(v)?;
    let mut out = CVector::zeros(fock.total_dim());
    for s in fock.sectors() {
        let target = fock.sector(&s.word.reversed()).expect("reversed sector exists");
        let rev_shape: Vec<usize> = s.shape.iter().rev().copied().collect();
        let mut digits = vec![0usize; s.shape.len()];
        for idx in 0..s.dim {
            let mut rem = idx;
            for (k, &n) in s.shape.iter().enumerate().rev() {
                digits[k] = rem % n;
                rem /= n;
            }
            let mut t_idx = 0;
            for (k, &n) in rev_shape.iter().enumerate() {
                t_idx = t_idx * n + digits[s.shape.len() - 1 - k];
            }
            out[target.offset + t_idx] = v[s.offset + idx];
        }
    }
    Ok(out)
}

/// `lambda_{k_1}(x_1) ... lambda_{k_n}(x_n) Omega`, applied right to left.
pub fn free_word_vector(fock: &FockSpace, factors: &[(Label, CMatrix)]) -> Result<(CVector, bool)> {
    apply_word(fock, factors, fock.vacuum())
}

/// Applies `lambda_{k_1}(x_1) ... lambda_{k_n}(x_n)` to `v`.
pub fn apply_word(fock: &FockSpace, factors: &[(Label, CMatrix)], v: CVector) -> Result<(CVector, bool)> {
    let mut v = v;
    let mut exact = true;
    for (label, x) in factors.iter().rev() {
        let (w, e) = lambda_act(fock, *label, x, &v)?;
        v = w;
        exact &= e;
    }
    Ok((v, exact))
}

/// Keeps only the sectors whose word satisfies `keep`.
pub fn project_sectors(fock: &FockSpace, v: &CVector, keep: impl Fn(&Word) -> bool) -> Result<CVector> {
    fock.check_vector(v)?;
    let mut out = CVector::zeros(fock.total_dim());
    for s in fock.sectors().iter().filter(|s| keep(&s.word)) {
        out.rows_mut(s.offset, s.dim).copy_from(&v.rows(s.offset, s.dim));
    }
    Ok(out)
}

/// `(P_{C Omega} + P_{H°_kappa}) v`.
pub fn project_vacuum_and_letter(fock: &FockSpace, label: Label, v: &CVector) -> Result<CVector> {
    project_sectors(fock, v, |w| w.is_empty() || w.letters() == [label])
}

/// Largest word length carrying weight above `tol` in `v`.
pub fn support_length(fock: &FockSpace, v: &CVector, tol: f64) -> usize {
    fock.sectors().iter().filter(|s| v.rows(s.offset, s.dim).norm() > tol).map(|s| s.word.len()).max().unwrap_or(0)
}

/// Norm of `[λ_k(T), ρ_k2(T2)] v - δ_{k k2} (P_{C Omega} + P_{H°_k}) λ_k([T, T2]) v`.
/// Requires `v` supported on words of length at most `max_len - 2`.
pub fn commutation_residual(
    fock: &FockSpace,
    label: Label,
    t: &CMatrix,
    label2: Label,
    t2: &CMatrix,
    v: &CVector,
) -> Result<f64> {
    fock.check_vector(v)?;
    let len = support_length(fock, v, 0.0);
    if len + 2 > fock.max_len() {
        return Err(Error::Inexact { len: len + 2, max_len: fock.max_len() });
    }
    let (rv, _) = rho_act(fock, label2, t2, v)?;
    let (lrv, _) = lambda_act(fock, label, t, &rv)?;
    let (lv, _) = lambda_act(fock, label, t, v)?;
    let (rlv, _) = rho_act(fock, label2, t2, &lv)?;
    let mut residual = lrv - rlv;
    if label == label2 {
        let (c, _) = lambda_act(fock, label, &(t * t2 - t2 * t), v)?;
        residual -= project_vacuum_and_letter(fock, label, &c)?;
    }
    Ok(residual.norm())
}
