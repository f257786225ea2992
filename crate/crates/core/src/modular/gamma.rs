use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{Label, Word};
use crate::linalg::{CMatrix, C64};

const ISOMETRY_TOL: f64 = 1e-10;
const ENTRY_TOL: f64 = 1e-15;

/// Finite model of a reduced canonical endomorphism: a square matrix and
/// an index window `[lo, hi)` treated as free of boundary effects.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaModel {
    matrix: CMatrix,
    window: (usize, usize),
}

impl GammaModel {
    pub fn new(matrix: CMatrix, window: (usize, usize)) -> Result<Self> {
        let n = matrix.nrows();
        if matrix.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: matrix.ncols() });
        }
        let (lo, hi) = window;
        if lo >= hi || hi > n {
            return Err(Error::InvalidParameter {
                name: "window",
                reason: format!("[{lo}, {hi}) is not a nonempty range inside 0..{n}"),
            });
        }
        let cols = matrix.columns(lo, hi - lo);
        let gram = cols.adjoint() * cols;
        let defect = (gram - CMatrix::identity(hi - lo, hi - lo)).norm();
        if defect > ISOMETRY_TOL {
            return Err(Error::InvalidParameter {
                name: "matrix",
                reason: format!("not isometric on window columns (defect {defect:.3e})"),
            });
        }
        Ok(GammaModel { matrix, window })
    }

    /// Forward shift `e_j -> e_{j+1}` on `C^size`, last column zero.
    pub fn truncated_shift(size: usize, window: (usize, usize)) -> Result<Self> {
        let mut m = CMatrix::zeros(size, size);
        for j in 0..size.saturating_sub(1) {
            m[(j + 1, j)] = C64::new(1.0, 0.0);
        }
        Self::new(m, window)
    }

    pub fn identity(size: usize, window: (usize, usize)) -> Result<Self> {
        Self::new(CMatrix::identity(size, size), window)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn window(&self) -> (usize, usize) {
        self.window
    }

    pub fn bandwidth(&self) -> usize {
        let n = self.matrix.nrows();
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.matrix[(i, j)].norm() > ENTRY_TOL)
            .map(|(i, j)| i.abs_diff(j))
            .max()
            .unwrap_or(0)
    }

    /// Largest power for which window entries cannot feel the matrix edge,
    /// `None` for a diagonal matrix.
    pub fn horizon(&self) -> Option<usize> {
        let b = self.bandwidth();
        if b == 0 {
            return None;
        }
        let (lo, hi) = self.window;
        Some(lo.min(self.matrix.nrows() - hi) / b)
    }

    fn window_sup(&self, power: &CMatrix) -> f64 {
        let (lo, hi) = self.window;
        let mut sup: f64 = 0.0;
        for i in lo..hi {
            for j in lo..hi {
                sup = sup.max(power[(i, j)].norm());
            }
        }
        sup
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub n: usize,
    pub word: Word,
    pub sup_entry: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayTable {
    pub rows: Vec<DecayRow>,
    /// Common boundary-free horizon, `None` if unbounded.
    pub horizon: Option<usize>,
    pub n_requested: usize,
    /// Last power actually evaluated.
    pub n_evaluated: usize,
    pub truncated: bool,
    /// Labels whose window entries show no decay over the evaluated range.
    pub non_decaying_labels: Vec<Label>,
}

impl DecayTable {
    /// Largest sup entry over sectors at each power `0..=n_evaluated`.
    pub fn max_by_step(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n_evaluated + 1];
        for r in &self.rows {
            out[r.n] = f64::max(out[r.n], r.sup_entry);
        }
        out
    }

    /// Whether every sector's sequence is nonincreasing up to `tol`.
    pub fn is_nonincreasing(&self, tol: f64) -> bool {
        let mut by_word: BTreeMap<&Word, Vec<(usize, f64)>> = BTreeMap::new();
        for r in &self.rows {
            by_word.entry(&r.word).or_default().push((r.n, r.sup_entry));
        }
        by_word.values_mut().all(|seq| {
            seq.sort_by_key(|p| p.0);
            seq.windows(2).all(|w| w[1].1 <= w[0].1 + tol)
        })
    }

    pub fn hypothesis_failed(&self) -> bool {
        !self.non_decaying_labels.is_empty()
    }
}

/// Alternating words of length `1..=max_len` over `labels`, length-major
/// and lexicographic.
pub fn alternating_words(labels: &[Label], max_len: usize) -> Vec<Word> {
    let mut out = Vec::new();
    let mut layer = vec![Word::vacuum()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &layer {
            for &l in labels {
                if w.letters().last() != Some(&l) {
                    let mut letters = w.letters().to_vec();
                    letters.push(l);
                    next.push(Word(letters));
                }
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// Sup over window entries of `(Γ°_{k_1} (x) ... (x) Γ°_{k_m})^n` for every
/// alternating word up to `fock_shape.1` letters and `n = 0..=n_max`.
/// Powers beyond the common horizon are not evaluated and the table is
/// marked truncated.
pub fn gamma_decay_probe(
    models: &BTreeMap<Label, GammaModel>,
    fock_shape: (usize, usize),
    n_max: usize,
) -> Result<DecayTable> {
    let (k, max_len) = fock_shape;
    if models.len() != k {
        return Err(Error::DimensionMismatch { expected: k, got: models.len() });
    }
    if k == 0 {
        return Err(Error::NoSeeds);
    }
    let horizon = models.values().filter_map(GammaModel::horizon).min();
    let n_evaluated = horizon.map_or(n_max, |h| h.min(n_max));
    let truncated = n_evaluated < n_max;

    let sups: BTreeMap<Label, Vec<f64>> = models
        .iter()
        .map(|(l, m)| {
            let mut power = CMatrix::identity(m.matrix.nrows(), m.matrix.nrows());
            let mut seq = Vec::with_capacity(n_evaluated + 1);
            for n in 0..=n_evaluated {
                if n > 0 {
                    power = &m.matrix * &power;
                }
                seq.push(m.window_sup(&power));
            }
            (*l, seq)
        })
        .collect();

    let labels: Vec<Label> = models.keys().copied().collect();
    let words = alternating_words(&labels, max_len);
    let rows: Vec<DecayRow> = (0..=n_evaluated)
        .flat_map(|n| {
            let sups = &sups;
            words.iter().map(move |w| DecayRow {
                n,
                word: w.clone(),
                sup_entry: w.letters().iter().map(|l| sups[l][n]).product(),
            })
        })
        .collect();
    let non_decaying_labels =
        sups.iter().filter(|(_, seq)| seq[n_evaluated] >= seq[0] - 1e-12).map(|(l, _)| *l).collect();
    Ok(DecayTable { rows, horizon, n_requested: n_max, n_evaluated, truncated, non_decaying_labels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::kron;

    fn shifts(k: usize) -> BTreeMap<Label, GammaModel> {
        (1..=k).map(|l| (l, GammaModel::truncated_shift(30, (10, 20)).unwrap())).collect()
    }

    #[test]
    fn single_shift_vanishes_past_gap() {
        let table = gamma_decay_probe(&shifts(1), (1, 1), 10).unwrap();
        let steps = table.max_by_step();
        assert!(!table.truncated);
        for (n, s) in steps.iter().enumerate() {
            assert_eq!(*s, if n <= 9 { 1.0 } else { 0.0 });
        }
        assert!(table.is_nonincreasing(1e-12));
        assert!(table.non_decaying_labels.is_empty());
    }

    #[test]
    fn tensor_sup_matches_explicit_kronecker_power() {
        let a = GammaModel::truncated_shift(12, (4, 8)).unwrap();
        let mut m = CMatrix::zeros(12, 12);
        for j in 0..10 {
            m[(j + 2, j)] = C64::new(1.0, 0.0);
        }
        let b = GammaModel::new(m, (4, 8)).unwrap();
        let models: BTreeMap<Label, GammaModel> = [(1, a.clone()), (2, b.clone())].into();
        let table = gamma_decay_probe(&models, (2, 2), 4).unwrap();
        assert_eq!(table.horizon, Some(2));
        assert!(table.truncated);
        let ab = kron(a.matrix(), b.matrix());
        let mut power = CMatrix::identity(144, 144);
        for n in 0..=table.n_evaluated {
            if n > 0 {
                power = &ab * &power;
            }
            let mut sup: f64 = 0.0;
            for i1 in 4..8 {
                for i2 in 4..8 {
                    for j1 in 4..8 {
                        for j2 in 4..8 {
                            sup = sup.max(power[(i1 * 12 + i2, j1 * 12 + j2)].norm());
                        }
                    }
                }
            }
            let row = table.rows.iter().find(|r| r.n == n && r.word == Word(vec![1, 2])).unwrap();
            assert_eq!(row.sup_entry, sup);
        }
    }

    #[test]
    fn identity_model_reports_hypothesis_failure() {
        let models: BTreeMap<Label, GammaModel> = [(1, GammaModel::identity(10, (2, 8)).unwrap())].into();
        let table = gamma_decay_probe(&models, (1, 3), 20).unwrap();
        assert_eq!(table.horizon, None);
        assert!(table.hypothesis_failed());
        assert!(table.max_by_step().iter().all(|&s| s == 1.0));
    }

    #[test]
    fn word_enumeration_and_errors() {
        let w = alternating_words(&[1, 2, 3], 3);
        assert_eq!(w.len(), 3 + 6 + 12);
        assert!(w.iter().all(Word::is_alternating));
        assert!(gamma_decay_probe(&shifts(2), (3, 2), 3).is_err());
        assert!(GammaModel::new(CMatrix::zeros(5, 5), (1, 3)).is_err());
        assert!(GammaModel::truncated_shift(5, (3, 3)).is_err());
    }
}
