//! Spectra of free-product conformal Hamiltonians and the associated heat
//! trace series.

use std::collections::BTreeMap;
use std::io::Read;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::Label;
use crate::par;

/// Energies closer than this are merged into one level.
pub const MERGE_TOL: f64 = 1e-9;
/// Allowed slack in `truncated trace <= bound`.
pub const BOUND_SLACK: f64 = 1e-9;
pub const SPLIT_SEARCH: (f64, f64) = (1e-6, 1e3);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub energy: f64,
    pub multiplicity: u64,
}

/// Reduced spectrum of a positive Hamiltonian whose kernel is spanned by
/// the vacuum. Levels are strictly positive, ascending and merged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumModel {
    label: Label,
    levels: Vec<Level>,
}

impl SpectrumModel {
    pub fn new(label: Label, levels: impl IntoIterator<Item = (f64, u64)>) -> Result<Self> {
        let mut raw = Vec::new();
        for (energy, multiplicity) in levels {
            if !(energy > 0.0) || !energy.is_finite() {
                return Err(Error::Spectrum(format!("reduced level {energy} must be finite and positive")));
            }
            if multiplicity == 0 {
                return Err(Error::Spectrum(format!("level {energy} has multiplicity 0")));
            }
            raw.push(Level { energy, multiplicity });
        }
        Ok(SpectrumModel { label, levels: merge(raw)? })
    }

    /// Vacuum only.
    pub fn trivial(label: Label) -> Self {
        SpectrumModel { label, levels: Vec::new() }
    }

    /// Levels `1, 2, ..., n_levels`, each simple.
    pub fn geometric(label: Label, n_levels: usize) -> Self {
        let levels = (1..=n_levels).map(|n| Level { energy: n as f64, multiplicity: 1 }).collect();
        SpectrumModel { label, levels }
    }

    /// Reads `eigenvalue,multiplicity` rows. The vacuum row `0,1` must be
    /// present exactly once. An optional non-numeric header row and `#`
    /// comment lines are skipped.
    pub fn from_csv<R: Read>(label: Label, reader: R) -> Result<Self> {
        let mut rdr =
            csv::ReaderBuilder::new().has_headers(false).comment(Some(b'#')).trim(csv::Trim::All).from_reader(reader);
        let mut vacuum_rows = 0;
        let mut levels = Vec::new();
        for (i, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| Error::Spectrum(format!("csv: {e}")))?;
            if record.len() != 2 {
                return Err(Error::Spectrum(format!("row {}: expected 2 fields, found {}", i + 1, record.len())));
            }
            let energy = match record[0].parse::<f64>() {
                Ok(e) => e,
                Err(_) if i == 0 => continue,
                Err(e) => return Err(Error::Spectrum(format!("row {}: {e}", i + 1))),
            };
            let mult: u64 = record[1].parse().map_err(|e| Error::Spectrum(format!("row {}: {e}", i + 1)))?;
            if energy == 0.0 {
                if mult != 1 {
                    return Err(Error::Spectrum(format!("vacuum row must have multiplicity 1, found {mult}")));
                }
                vacuum_rows += 1;
            } else {
                levels.push((energy, mult));
            }
        }
        if vacuum_rows != 1 {
            return Err(Error::Spectrum(format!("expected exactly one vacuum row, found {vacuum_rows}")));
        }
        Self::new(label, levels)
    }

    /// CSV form accepted by [`SpectrumModel::from_csv`], vacuum row first.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("eigenvalue,multiplicity\n0,1\n");
        for l in &self.levels {
            out.push_str(&format!("{},{}\n", l.energy, l.multiplicity));
        }
        out
    }

    pub fn label(&self) -> Label {
        self.label
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn min_level(&self) -> Option<f64> {
        self.levels.first().map(|l| l.energy)
    }

    /// Total multiplicity including the vacuum.
    pub fn dimension(&self) -> Result<u64> {
        self.levels.iter().try_fold(1u64, |acc, l| acc.checked_add(l.multiplicity).ok_or(Error::MultiplicityOverflow))
    }

    /// `Σ mult e^{-s E}` over the reduced levels.
    pub fn reduced_trace(&self, s: f64) -> f64 {
        self.levels.iter().map(|l| l.multiplicity as f64 * (-s * l.energy).exp()).sum()
    }
}

fn merge(mut raw: Vec<Level>) -> Result<Vec<Level>> {
    raw.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    let mut out: Vec<Level> = Vec::with_capacity(raw.len());
    let mut anchor = f64::NEG_INFINITY;
    for l in raw {
        match out.last_mut() {
            Some(last) if l.energy - anchor <= MERGE_TOL => {
                last.multiplicity = last.multiplicity.checked_add(l.multiplicity).ok_or(Error::MultiplicityOverflow)?;
            }
            _ => {
                anchor = l.energy;
                out.push(l);
            }
        }
    }
    Ok(out)
}

/// Spectrum of the free-product Hamiltonian restricted to words of length
/// at most `max_len`: sums of reduced seed levels along alternating words,
/// discarding sums above `energy_cutoff`. The result carries label 0.
pub fn free_product_spectrum(
    seeds: &BTreeMap<Label, SpectrumModel>,
    max_len: usize,
    energy_cutoff: f64,
) -> Result<SpectrumModel> {
    if seeds.is_empty() {
        return Err(Error::NoSeeds);
    }
    if !(energy_cutoff > 0.0) {
        return Err(Error::InvalidParameter {
            name: "energy_cutoff",
            reason: format!("must be positive, got {energy_cutoff}"),
        });
    }
    let labels: Vec<Label> = seeds.keys().copied().collect();
    let cut = |levels: &[Level]| levels.iter().copied().filter(|l| l.energy <= energy_cutoff).collect::<Vec<_>>();
    let mut ending: Vec<Vec<Level>> = labels.iter().map(|l| cut(seeds[l].levels())).collect();
    let mut all: Vec<Level> = Vec::new();
    for len in 1..=max_len {
        if len > 1 {
            let prev = &ending;
            let next = par::map_range(labels.len(), |k| -> Result<Vec<Level>> {
                let mut raw = Vec::new();
                for (j, tails) in prev.iter().enumerate() {
                    if j == k {
                        continue;
                    }
                    for a in tails {
                        for b in seeds[&labels[k]].levels() {
                            let energy = a.energy + b.energy;
                            if energy > energy_cutoff {
                                break;
                            }
                            let multiplicity =
                                a.multiplicity.checked_mul(b.multiplicity).ok_or(Error::MultiplicityOverflow)?;
                            raw.push(Level { energy, multiplicity });
                        }
                    }
                }
                merge(raw)
            });
            ending = next.into_iter().collect::<Result<Vec<_>>>()?;
        }
        if ending.iter().all(Vec::is_empty) {
            break;
        }
        all.extend(ending.iter().flatten().copied());
        all = merge(all)?;
    }
    Ok(SpectrumModel { label: 0, levels: all })
}

/// `1 + Σ mult e^{-s E}`.
pub fn truncated_trace(spec: &SpectrumModel, s: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::InvalidParameter { name: "s", reason: format!("must be positive, got {s}") });
    }
    Ok(1.0 + spec.reduced_trace(s))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    Finite(f64),
    Divergent,
}

impl Bound {
    pub fn value(self) -> Option<f64> {
        match self {
            Bound::Finite(v) => Some(v),
            Bound::Divergent => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Bound::Finite(_))
    }
}

fn check_epsilons<'a>(eps: impl IntoIterator<Item = &'a f64>, name: &'static str) -> Result<()> {
    for &e in eps {
        if !(e >= 0.0) || !e.is_finite() {
            return Err(Error::InvalidParameter {
                name,
                reason: format!("entries must be finite and nonnegative, got {e}"),
            });
        }
    }
    Ok(())
}

/// `1 + Σ_n ε^n K (K-1)^{n-1}` with `ε = max ε_k`, summed in closed form.
pub fn distal_bound(epsilons: &BTreeMap<Label, f64>, k_size: usize) -> Result<Bound> {
    if k_size < 1 {
        return Err(Error::InvalidParameter { name: "k_size", reason: "at least one seed is required".into() });
    }
    check_epsilons(epsilons.values(), "epsilons")?;
    let eps = epsilons.values().copied().fold(0.0, f64::max);
    let k = k_size as f64;
    let ratio = eps * (k - 1.0);
    if ratio >= 1.0 {
        return Ok(Bound::Divergent);
    }
    Ok(Bound::Finite(1.0 + k * eps / (1.0 - ratio)))
}

/// Partial sum `1 + Σ_{n<=max_len} ε^n K (K-1)^{n-1}`.
pub fn distal_partial_sum(eps: f64, k_size: usize, max_len: usize) -> f64 {
    let k = k_size as f64;
    let mut term = k * eps;
    let mut total = 1.0;
    for _ in 0..max_len {
        total += term;
        term *= eps * (k - 1.0);
    }
    total
}

/// Tighter estimate keeping the individual `ε_k`: the sum over alternating
/// words of `Π ε_{k_j}`, equal to `1 + 1ᵀ D (I - A D)^{-1} 1` with `D`
/// diagonal in the `ε_k` and `A` the adjacency matrix of the complete graph.
/// Not part of the default bound.
pub fn refined_word_bound(epsilons: &BTreeMap<Label, f64>) -> Result<Bound> {
    check_epsilons(epsilons.values(), "epsilons")?;
    let eps: Vec<f64> = epsilons.values().copied().collect();
    let k = eps.len();
    if k == 0 {
        return Ok(Bound::Finite(1.0));
    }
    let sqrt: Vec<f64> = eps.iter().map(|e| e.sqrt()).collect();
    let sym = DMatrix::from_fn(k, k, |i, j| if i == j { 0.0 } else { sqrt[i] * sqrt[j] });
    let radius = sym.symmetric_eigen().eigenvalues.iter().copied().fold(0.0, f64::max);
    if radius >= 1.0 {
        return Ok(Bound::Divergent);
    }
    let system = DMatrix::from_fn(k, k, |i, j| if i == j { 1.0 } else { -eps[j] });
    let ones = nalgebra::DVector::from_element(k, 1.0);
    let x = system.lu().solve(&ones).ok_or_else(|| Error::Numerical("singular refined-bound system".into()))?;
    Ok(Bound::Finite(1.0 + eps.iter().zip(x.iter()).map(|(e, xi)| e * xi).sum::<f64>()))
}

/// `ε = Σ deficits` and the bound `1 / (1 - ε)` on `1 + Σ_n ε^n`.
pub fn l2_nuclearity_series(deficits: &[f64]) -> Result<(f64, Bound)> {
    check_epsilons(deficits, "deficits")?;
    let eps: f64 = deficits.iter().sum();
    if eps >= 1.0 {
        return Ok((eps, Bound::Divergent));
    }
    Ok((eps, Bound::Finite(1.0 / (1.0 - eps))))
}

/// Smallest `s` in the search range with reduced trace below `1/(K-1)`,
/// located by bisection to `tol`.
pub fn split_distance(seed: &SpectrumModel, k_size: usize, tol: f64) -> Result<f64> {
    if k_size < 2 {
        return Err(Error::InvalidParameter { name: "k_size", reason: format!("must be at least 2, got {k_size}") });
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter { name: "tol", reason: format!("must be positive, got {tol}") });
    }
    let threshold = 1.0 / (k_size as f64 - 1.0);
    let (mut lo, mut hi) = SPLIT_SEARCH;
    if seed.reduced_trace(lo) < threshold {
        return Ok(lo);
    }
    if seed.reduced_trace(hi) >= threshold {
        return Err(Error::NoSplitDistance { threshold });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if seed.reduced_trace(mid) < threshold {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceReport {
    pub s: f64,
    pub epsilon_per_seed: BTreeMap<Label, f64>,
    pub truncated_trace: f64,
    pub closed_form_bound: Bound,
    pub max_len: usize,
    pub energy_cutoff: f64,
    /// `bound - partial closed form at max_len`, absent when divergent.
    pub tail_estimate: Option<f64>,
    pub conclusive: bool,
    /// `truncated_trace <= bound + BOUND_SLACK`, absent when divergent.
    pub bound_holds: Option<bool>,
}

/// Truncated free-product heat trace compared against [`distal_bound`].
pub fn verify_trace_bound(
    seeds: &BTreeMap<Label, SpectrumModel>,
    s: f64,
    max_len: usize,
    cutoff: f64,
) -> Result<TraceReport> {
    let spectrum = free_product_spectrum(seeds, max_len, cutoff)?;
    let truncated = truncated_trace(&spectrum, s)?;
    let epsilon_per_seed: BTreeMap<Label, f64> = seeds.iter().map(|(l, m)| (*l, m.reduced_trace(s))).collect();
    let bound = distal_bound(&epsilon_per_seed, seeds.len())?;
    let eps = epsilon_per_seed.values().copied().fold(0.0, f64::max);
    let tail_estimate = bound.value().map(|b| b - distal_partial_sum(eps, seeds.len(), max_len));
    Ok(TraceReport {
        s,
        truncated_trace: truncated,
        closed_form_bound: bound,
        max_len,
        energy_cutoff: cutoff,
        tail_estimate,
        conclusive: bound.is_finite(),
        bound_holds: bound.value().map(|b| truncated <= b + BOUND_SLACK),
        epsilon_per_seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(a: SpectrumModel, b: SpectrumModel) -> BTreeMap<Label, SpectrumModel> {
        [(1, a), (2, b)].into()
    }

    /// Enumerates alternating words explicitly and sums levels.
    fn brute_force(seeds: &BTreeMap<Label, SpectrumModel>, max_len: usize, cutoff: f64) -> Vec<(f64, u64)> {
        let mut stack: Vec<(Option<Label>, usize, f64, u64)> = vec![(None, 0, 0.0, 1)];
        let mut out = Vec::new();
        while let Some((last, len, e, m)) = stack.pop() {
            if len > 0 && e <= cutoff {
                out.push(Level { energy: e, multiplicity: m });
            }
            if len == max_len {
                continue;
            }
            for (l, model) in seeds {
                if Some(*l) == last {
                    continue;
                }
                for lvl in model.levels() {
                    stack.push((Some(*l), len + 1, e + lvl.energy, m * lvl.multiplicity));
                }
            }
        }
        merge(out).unwrap().into_iter().map(|l| (l.energy, l.multiplicity)).collect()
    }

    #[test]
    fn single_seed_is_unchanged() {
        let seed = SpectrumModel::new(1, [(1.0, 2), (2.5, 3)]).unwrap();
        let seeds: BTreeMap<_, _> = [(1, seed.clone())].into();
        let out = free_product_spectrum(&seeds, 5, 100.0).unwrap();
        assert_eq!(out.levels(), seed.levels());
    }

    #[test]
    fn two_unit_levels() {
        let one = SpectrumModel::new(0, [(1.0, 1)]).unwrap();
        let out = free_product_spectrum(&pair(one.clone(), one), 2, 10.0).unwrap();
        assert_eq!(out.levels(), &[Level { energy: 1.0, multiplicity: 2 }, Level { energy: 2.0, multiplicity: 2 }]);
    }

    #[test]
    fn cutoff_below_spectrum_leaves_vacuum() {
        let seeds = pair(SpectrumModel::geometric(1, 5), SpectrumModel::geometric(2, 5));
        let out = free_product_spectrum(&seeds, 4, 0.5).unwrap();
        assert!(out.levels().is_empty());
        assert_eq!(truncated_trace(&out, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn matches_explicit_enumeration() {
        let seeds: BTreeMap<_, _> = [
            (1, SpectrumModel::new(1, [(0.5, 1), (1.25, 2)]).unwrap()),
            (2, SpectrumModel::new(2, [(0.75, 3)]).unwrap()),
            (3, SpectrumModel::new(3, [(1.0, 1), (2.0, 1)]).unwrap()),
        ]
        .into();
        let fast = free_product_spectrum(&seeds, 4, 3.0).unwrap();
        let slow = brute_force(&seeds, 4, 3.0);
        let fast: Vec<_> = fast.levels().iter().map(|l| (l.energy, l.multiplicity)).collect();
        assert_eq!(fast.len(), slow.len());
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a.0 - b.0).abs() < 1e-12);
            assert_eq!(a.1, b.1);
        }
    }

    #[test]
    fn geometric_partial_sums() {
        let seed = SpectrumModel::geometric(1, 30);
        let s: f64 = 0.7;
        let partial: f64 = (1..=30).map(|n| (-s * n as f64).exp()).sum::<f64>() + 1.0;
        assert!((truncated_trace(&seed, s).unwrap() - partial).abs() < 1e-14);
        let limit = (-s).exp() / (1.0 - (-s).exp()) + 1.0;
        assert!(limit - partial < (-s * 31.0).exp() / (1.0 - (-s).exp()) + 1e-15);
        assert!(truncated_trace(&seed, 60.0).unwrap() - 1.0 < 1e-25);
        assert!(truncated_trace(&seed, 0.0).is_err());
    }

    #[test]
    fn distal_bound_examples() {
        let e = |v: f64| -> BTreeMap<Label, f64> { [(1, v), (2, v * 0.5)].into() };
        assert!((distal_bound(&e(1.0 / 3.0), 2).unwrap().value().unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(distal_bound(&e(0.0), 2).unwrap(), Bound::Finite(1.0));
        assert_eq!(distal_bound(&e(0.5), 3).unwrap(), Bound::Divergent);
        assert!(distal_bound(&e(0.1), 0).is_err());
        assert!(distal_bound(&e(-0.1), 2).is_err());
    }

    #[test]
    fn closed_forms_versus_partial_sums() {
        let (eps, k) = (0.2, 3);
        let closed = distal_bound(&[(1, eps)].into(), k).unwrap().value().unwrap();
        for n in 0..20 {
            let omitted = eps.powi(n as i32 + 1) * k as f64 * ((k - 1) as f64).powi(n as i32);
            let gap = closed - distal_partial_sum(eps, k, n);
            assert!(gap >= 0.0 && gap <= omitted / (1.0 - eps * (k - 1) as f64) + 1e-15);
        }
    }

    #[test]
    fn refined_bound_matches_word_sum() {
        let eps: BTreeMap<Label, f64> = [(1, 0.1), (2, 0.3), (3, 0.2)].into();
        let mut words: Vec<(usize, f64)> = vec![(0, 1.0)];
        let mut total = 1.0;
        for _ in 0..80 {
            let mut next = Vec::new();
            for (last, w) in &words {
                for (l, e) in &eps {
                    if l != last {
                        next.push((*l, w * e));
                    }
                }
            }
            let mut agg: BTreeMap<usize, f64> = BTreeMap::new();
            for (l, w) in next {
                *agg.entry(l).or_default() += w;
            }
            words = agg.into_iter().collect();
            total += words.iter().map(|p| p.1).sum::<f64>();
        }
        let refined = refined_word_bound(&eps).unwrap().value().unwrap();
        assert!((refined - total).abs() < 1e-12);
        let uniform = distal_bound(&eps, 3).unwrap().value().unwrap();
        assert!(refined <= uniform);
        assert_eq!(refined_word_bound(&[(1, 0.9), (2, 1.2)].into()).unwrap(), Bound::Divergent);
    }

    #[test]
    fn l2_series() {
        assert_eq!(l2_nuclearity_series(&[0.25, 0.125, 0.125]).unwrap(), (0.5, Bound::Finite(2.0)));
        assert_eq!(l2_nuclearity_series(&[]).unwrap(), (0.0, Bound::Finite(1.0)));
        assert_eq!(l2_nuclearity_series(&[0.5, 0.5]).unwrap().1, Bound::Divergent);
        assert!(l2_nuclearity_series(&[-0.1]).is_err());
    }

    #[test]
    fn split_distance_examples() {
        let seed = SpectrumModel::geometric(1, 200);
        assert!((split_distance(&seed, 2, 1e-9).unwrap() - 2f64.ln()).abs() < 1e-6);
        assert!((split_distance(&seed, 11, 1e-9).unwrap() - 11f64.ln()).abs() < 1e-6);
        let single = SpectrumModel::new(1, [(2.0, 1)]).unwrap();
        assert_eq!(split_distance(&single, 2, 1e-9).unwrap(), SPLIT_SEARCH.0);
        let huge = SpectrumModel::new(1, [(1e-5, u64::MAX / 2)]).unwrap();
        assert!(matches!(split_distance(&huge, 2, 1e-9), Err(Error::NoSplitDistance { .. })));
    }

    #[test]
    fn trace_report_for_geometric_pair() {
        let seeds = pair(SpectrumModel::geometric(1, 200), SpectrumModel::geometric(2, 200));
        let eps = (-1f64).exp() / (1.0 - (-1f64).exp());
        let mut last = 0.0;
        for max_len in 0..6 {
            let report = verify_trace_bound(&seeds, 1.0, max_len, 60.0).unwrap();
            assert!((report.epsilon_per_seed[&1] - eps).abs() < 1e-12);
            let bound = report.closed_form_bound.value().unwrap();
            assert!((bound - (1.0 + 2.0 * eps / (1.0 - eps))).abs() < 1e-12);
            assert_eq!(report.bound_holds, Some(true));
            assert!(report.truncated_trace >= last);
            last = report.truncated_trace;
            if max_len == 0 {
                assert_eq!(report.truncated_trace, 1.0);
            }
        }
        let below = verify_trace_bound(&seeds, 0.3, 3, 40.0).unwrap();
        assert!(!below.conclusive && below.bound_holds.is_none() && below.truncated_trace.is_finite());
    }

    #[test]
    fn csv_round_trip_and_validation() {
        let seed = SpectrumModel::new(4, [(1.0, 1), (2.0, 2), (3.5, 7)]).unwrap();
        let back = SpectrumModel::from_csv(4, seed.to_csv().as_bytes()).unwrap();
        assert_eq!(back, seed);
        assert!(SpectrumModel::from_csv(1, "1,1\n2,1\n".as_bytes()).is_err());
        assert!(SpectrumModel::from_csv(1, "0,2\n1,1\n".as_bytes()).is_err());
        assert!(SpectrumModel::from_csv(1, "0,1\n-1,1\n".as_bytes()).is_err());
        assert!(SpectrumModel::from_csv(1, "# comment\n0,1\n2,0\n".as_bytes()).is_err());
        let ok = SpectrumModel::from_csv(1, "# c\n0, 1\n 2 , 3\n2.0000000001,1\n".as_bytes()).unwrap();
        assert_eq!(ok.levels(), &[Level { energy: 2.0, multiplicity: 4 }]);
    }
}
