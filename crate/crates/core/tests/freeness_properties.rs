mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::{random_fock, rng, short_vector};
use freelab::fock::Label;
use freelab::freeness::{
    center, check_free_independence, conditional_expectation_vector, moment, split_word_orthogonality, MomentWord,
};
use freelab::linalg::random_matrix;
use proptest::prelude::*;
use rand::Rng;

fn config() -> impl Strategy<Value = (u64, Vec<usize>, usize)> {
    (any::<u64>(), prop::collection::vec(2usize..=4, 2..=3), 1usize..=3)
}

fn subsets(k: usize) -> Vec<BTreeSet<Label>> {
    (1u32..(1 << k)).map(|mask| (1..=k).filter(|l| mask & (1 << (l - 1)) != 0).collect()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn centered_alternating_moments_vanish((seed, dims, max_len) in config()) {
        let mut r = rng(seed);
        let fock = random_fock(&mut r, &dims, max_len);
        let families: BTreeMap<Label, Vec<_>> =
            (1..=dims.len()).map(|l| (l, (0..2).map(|_| random_matrix(&mut r, dims[l - 1], dims[l - 1])).collect())).collect();
        let report = check_free_independence(&fock, &families, 40, 1e-10, seed).unwrap();
        prop_assert!(report.passed, "max residual {}", report.max_residual);
        prop_assert_eq!(report.skipped_inexact, 0);
        prop_assert_eq!(report.sampled, 40);
    }

    #[test]
    fn moments_respect_the_norm_bound((seed, dims, max_len) in config()) {
        let mut r = rng(seed);
        let fock = random_fock(&mut r, &dims, max_len);
        let n = r.random_range(0..=2 * max_len);
        let factors = (0..n).map(|_| {
            let l = r.random_range(1..=dims.len());
            (l, random_matrix(&mut r, dims[l - 1], dims[l - 1]))
        }).collect();
        let w = MomentWord::new(factors);
        let m = moment(&fock, &w).unwrap();
        prop_assert!(m.exact);
        prop_assert!(m.value.norm() <= w.norm_bound() * (1.0 + 1e-12));
    }

    #[test]
    fn conditional_expectations_are_commuting_projections((seed, dims, max_len) in config()) {
        let mut r = rng(seed);
        let fock = random_fock(&mut r, &dims, max_len);
        let all = subsets(dims.len());
        let a = &all[r.random_range(0..all.len())];
        let b = &all[r.random_range(0..all.len())];
        let u = short_vector(&mut r, &fock, max_len);
        let v = short_vector(&mut r, &fock, max_len);
        let eu = conditional_expectation_vector(&fock, a, &u).unwrap();
        prop_assert_eq!(conditional_expectation_vector(&fock, a, &eu).unwrap(), eu.clone());
        let ev = conditional_expectation_vector(&fock, a, &v).unwrap();
        prop_assert!((eu.dotc(&v) - u.dotc(&ev)).norm() < 1e-12);
        let ab = conditional_expectation_vector(&fock, b, &eu).unwrap();
        let ba = conditional_expectation_vector(&fock, a, &conditional_expectation_vector(&fock, b, &u).unwrap()).unwrap();
        prop_assert_eq!(ab.clone(), ba);
        let meet: BTreeSet<Label> = a.intersection(b).copied().collect();
        if !meet.is_empty() {
            prop_assert_eq!(ab, conditional_expectation_vector(&fock, &meet, &u).unwrap());
        }
    }

    #[test]
    fn split_word_inner_products_vanish(seed in any::<u64>(), dims in prop::collection::vec(2usize..=4, 2..=3), max_len in 2usize..=3) {
        let mut r = rng(seed);
        let fock = random_fock(&mut r, &dims, max_len);
        let k = dims.len();
        let outside = r.random_range(1..=k);
        let subset: BTreeSet<Label> = (1..=k).filter(|&l| l != outside).collect();
        let inside: Vec<Label> = subset.iter().copied().collect();
        let n = r.random_range(1..max_len);
        let factors = (0..n).map(|_| {
            let l = inside[r.random_range(0..inside.len())];
            (l, random_matrix(&mut r, dims[l - 1], dims[l - 1]))
        }).collect();
        let (a, _) = center(&fock, outside, &random_matrix(&mut r, dims[outside - 1], dims[outside - 1])).unwrap();
        let value = split_word_orthogonality(&fock, &subset, &MomentWord::new(factors), outside, &a).unwrap();
        prop_assert!(value.exact);
        prop_assert!(value.value.norm() < 1e-10);
    }
}
