//! Vector states, mixed moments and free-independence checks on a
//! [`FockSpace`], plus the vector-level conditional expectations onto
//! sub-families of seeds.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{free_word_vector, lambda_act, project_sectors, FockSpace, Label, Word};
use crate::linalg::{op_norm, CMatrix, CVector, C64};
use crate::par;

/// An element counts as centered when `|ω_κ(x)|` is below this.
pub const CENTER_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateValue {
    pub value: C64,
    pub exact: bool,
}

/// `λ_{κ_1}(x_1) ⋯ λ_{κ_n}(x_n)` as a list of labelled seed matrices.
#[derive(Debug, Clone, Default)]
pub struct MomentWord {
    pub factors: Vec<(Label, CMatrix)>,
}

impl MomentWord {
    pub fn new(factors: Vec<(Label, CMatrix)>) -> Self {
        Self { factors }
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn labels(&self) -> Word {
        Word(self.factors.iter().map(|(l, _)| *l).collect())
    }

    pub fn centered_flags(&self, fock: &FockSpace) -> Result<Vec<bool>> {
        self.factors.iter().map(|(l, x)| Ok(fock.seed(*l)?.state(x).norm() < CENTER_TOL)).collect()
    }

    /// `(x_1 ⋯ x_n)^* = x_n^* ⋯ x_1^*`.
    pub fn adjoint(&self) -> MomentWord {
        MomentWord { factors: self.factors.iter().rev().map(|(l, x)| (*l, x.adjoint())).collect() }
    }

    /// Product of the operator norms of the factors.
    pub fn norm_bound(&self) -> f64 {
        self.factors.iter().map(|(_, x)| op_norm(x)).product()
    }
}

/// `<Omega, v>`.
pub fn vacuum_expectation(fock: &FockSpace, v: &CVector) -> Result<C64> {
    fock.check_vector(v)?;
    Ok(v[0])
}

/// `ω(λ(x_1) ⋯ λ(x_n))`.
///
/// Evaluated as `<(x_1 ⋯ x_k)^* Omega, x_{k+1} ⋯ x_n Omega>` with
/// `k = n / 2`, so each side builds at most `ceil(n/2)` letters and the
/// value is exact for `n <= 2 max_len`.
pub fn moment(fock: &FockSpace, word: &MomentWord) -> Result<StateValue> {
    let k = word.len() / 2;
    let left = MomentWord::new(word.factors[..k].to_vec()).adjoint();
    let (lv, le) = free_word_vector(fock, &left.factors)?;
    let (rv, re) = free_word_vector(fock, &word.factors[k..])?;
    Ok(StateValue { value: lv.dotc(&rv), exact: le && re })
}

/// `x - ω_κ(x) 1`.
pub fn center(fock: &FockSpace, label: Label, x: &CMatrix) -> Result<(CMatrix, C64)> {
    let seed = fock.seed(label)?;
    seed.check_dim(x)?;
    let shift = seed.state(x);
    Ok((x - CMatrix::identity(seed.dim(), seed.dim()) * shift, shift))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CenteringShift {
    pub label: Label,
    pub generator: usize,
    /// `ω_κ(x)` that was subtracted, as `[re, im]`.
    pub shift: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordResidual {
    pub trial: usize,
    pub word: Word,
    pub residual: f64,
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreenessReport {
    pub seed: u64,
    pub trials: usize,
    pub tol: f64,
    /// Exact words that entered the statistics.
    pub sampled: usize,
    pub skipped_inexact: usize,
    pub max_residual: f64,
    /// Word attaining `max_residual` when it is at or above `tol`.
    pub offending_word: Option<Word>,
    pub passed: bool,
    pub centering_shifts: Vec<CenteringShift>,
    pub residuals: Vec<WordResidual>,
}

/// Samples random alternating words of centered elements and checks that
/// their free-product state vanishes.
///
/// Each factor is a random complex combination of the (centered)
/// generators of its family. Generators that center to zero, such as
/// every element of a one-dimensional seed, are dropped. Word lengths run over `1..=2 max_len`, the
/// range in which [`moment`] is exact. Trial `i` draws from ChaCha8 stream
/// `i` of `seed`, so the report does not depend on scheduling.
pub fn check_free_independence(
    fock: &FockSpace,
    families: &BTreeMap<Label, Vec<CMatrix>>,
    trials: usize,
    tol: f64,
    seed: u64,
) -> Result<FreenessReport> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter { name: "tol", reason: format!("must be positive, got {tol}") });
    }
    let mut centered: BTreeMap<Label, Vec<CMatrix>> = BTreeMap::new();
    let mut shifts = Vec::new();
    for (&label, gens) in families {
        let mut list = Vec::with_capacity(gens.len());
        for (i, g) in gens.iter().enumerate() {
            let (x, s) = center(fock, label, g)?;
            if s.norm() >= CENTER_TOL {
                shifts.push(CenteringShift { label, generator: i, shift: [s.re, s.im] });
            }
            if op_norm(&x) > CENTER_TOL * op_norm(g).max(1.0) {
                list.push(x);
            }
        }
        if !list.is_empty() {
            centered.insert(label, list);
        }
    }
    let labels: Vec<Label> = centered.keys().copied().collect();

    let results: Vec<Option<(Word, StateValue)>> =
        par::map_range(if labels.is_empty() { 0 } else { trials }, |trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial as u64);
            let max_n = if labels.len() > 1 { 2 * fock.max_len() } else { 1 };
            let n = rng.random_range(1..=max_n);
            let mut factors = Vec::with_capacity(n);
            let mut prev: Option<Label> = None;
            for _ in 0..n {
                let choices: Vec<Label> = labels.iter().copied().filter(|l| Some(*l) != prev).collect();
                let label = *choices.choose(&mut rng).expect("at least one label");
                let gens = &centered[&label];
                let mut x = CMatrix::zeros(gens[0].nrows(), gens[0].ncols());
                for g in gens {
                    let coef = C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
                    x += g * coef;
                }
                let norm = op_norm(&x);
                if norm > CENTER_TOL {
                    x.unscale_mut(norm);
                }
                factors.push((label, x));
                prev = Some(label);
            }
            let word = MomentWord::new(factors);
            moment(fock, &word).ok().map(|v| (word.labels(), v))
        });

    let mut report = FreenessReport {
        seed,
        trials,
        tol,
        sampled: 0,
        skipped_inexact: 0,
        max_residual: 0.0,
        offending_word: None,
        passed: true,
        centering_shifts: shifts,
        residuals: Vec::new(),
    };
    let mut worst: Option<Word> = None;
    for (trial, r) in results.into_iter().enumerate() {
        let Some((word, value)) = r else { continue };
        let residual = value.value.norm();
        report.residuals.push(WordResidual { trial, word: word.clone(), residual, exact: value.exact });
        if !value.exact {
            report.skipped_inexact += 1;
            continue;
        }
        report.sampled += 1;
        if residual > report.max_residual || worst.is_none() {
            report.max_residual = report.max_residual.max(residual);
            worst = Some(word);
        }
    }
    report.passed = report.max_residual < tol;
    if !report.passed {
        report.offending_word = worst;
    }
    Ok(report)
}

fn check_labels(fock: &FockSpace, labels: &BTreeSet<Label>) -> Result<()> {
    if labels.is_empty() {
        return Err(Error::InvalidParameter { name: "K1", reason: "subset of labels must be nonempty".into() });
    }
    for &l in labels {
        fock.seed(l)?;
    }
    Ok(())
}

/// Orthogonal projection onto the vacuum and the sectors whose words only
/// use letters from `subset`. This is `x Omega -> E(x) Omega` for the
/// state-preserving conditional expectation onto the subalgebra generated
/// by those seeds, and the corresponding Jones projection.
pub fn conditional_expectation_vector(fock: &FockSpace, subset: &BTreeSet<Label>, v: &CVector) -> Result<CVector> {
    check_labels(fock, subset)?;
    project_sectors(fock, v, |w| w.letters().iter().all(|l| subset.contains(l)))
}

/// `<λ(a) E(x) Omega, E(x) λ(a) Omega>` for a word `x` over `subset`,
/// recentred as `x - ω(x) 1`, and a centered `a` at a label outside `subset`.
/// Free independence of the two subalgebras makes this vanish.
pub fn split_word_orthogonality(
    fock: &FockSpace,
    subset: &BTreeSet<Label>,
    x_word: &MomentWord,
    outside: Label,
    a: &CMatrix,
) -> Result<StateValue> {
    check_labels(fock, subset)?;
    if subset.contains(&outside) {
        return Err(Error::InvalidParameter { name: "outside", reason: format!("label {outside} lies in K1") });
    }
    if let Some((l, _)) = x_word.factors.iter().find(|(l, _)| !subset.contains(l)) {
        return Err(Error::InvalidParameter { name: "x_word", reason: format!("letter {l} lies outside K1") });
    }
    let seed = fock.seed(outside)?;
    seed.check_dim(a)?;
    let wa = seed.state(a);
    if wa.norm() >= CENTER_TOL {
        return Err(Error::NotCentered { label: outside, value: wa.norm() });
    }

    let (x_omega, e1) = free_word_vector(fock, &x_word.factors)?;
    let x_omega = conditional_expectation_vector(fock, subset, &x_omega)?;
    let wx = x_omega[0];
    let mut xc_omega = x_omega;
    xc_omega[0] -= wx;
    let (left, e2) = lambda_act(fock, outside, a, &xc_omega)?;

    let (a_omega, e3) = lambda_act(fock, outside, a, &fock.vacuum())?;
    let (x_a_omega, e4) = crate::fock::apply_word(fock, &x_word.factors, a_omega.clone())?;
    let right = x_a_omega - a_omega * wx;

    Ok(StateValue { value: left.dotc(&right), exact: e1 && e2 && e3 && e4 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeSides {
    /// `‖a Omega_0‖ ‖x Omega‖`
    pub lhs: f64,
    /// `2 ‖x‖ ‖(a - b) Omega_0‖`
    pub rhs: f64,
}

impl ProbeSides {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs
    }
}

/// Both sides of the relative-commutant inequality for a candidate `x`
/// given through `x Omega` and `‖x‖`. A candidate commuting with every
/// copy of the subalgebra must satisfy `lhs <= rhs`; with `b = a` this
/// forces `x Omega = 0`.
pub fn centered_product_probe(
    fock: &FockSpace,
    label: Label,
    a: &CMatrix,
    b: &CMatrix,
    x_vector: &CVector,
    x_norm: f64,
) -> Result<ProbeSides> {
    fock.check_vector(x_vector)?;
    let seed = fock.seed(label)?;
    seed.check_dim(a)?;
    seed.check_dim(b)?;
    let wa = seed.state(a);
    if wa.norm() >= CENTER_TOL {
        return Err(Error::NotCentered { label, value: wa.norm() });
    }
    let omega = seed.omega();
    Ok(ProbeSides { lhs: (a * omega).norm() * x_vector.norm(), rhs: 2.0 * x_norm * ((a - b) * omega).norm() })
}
