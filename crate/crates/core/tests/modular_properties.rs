mod common;

use std::collections::BTreeMap;

use common::rng;
use freelab::fock::{FockSpace, Label, SeedSpace};
use freelab::freeness::MomentWord;
use freelab::linalg::{random_unit_vector, CMatrix, C64};
use freelab::modular::{
    gamma_decay_probe, modular_axioms_check, tomita, verify_with, FreeModular, GammaModel, MatrixAlgebra,
};
use proptest::prelude::*;
use rand::Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn polar_identity_for_random_faithful_states(seed in any::<u64>()) {
        let mut r = rng(seed);
        let alg = MatrixAlgebra::amplified(2, 2);
        let omega = random_unit_vector(&mut r, 4);
        let md = tomita(&alg, &omega).unwrap();
        let report = modular_axioms_check(&md, &alg, &omega, &[-3.0, -0.5, 0.0, 1.0, 4.0]);
        prop_assert!(report.polar < 1e-9);
        prop_assert!(report.passed, "{:?}", report);
    }

    #[test]
    fn tomita_is_presentation_independent(seed in any::<u64>()) {
        let mut r = rng(seed);
        let alg = MatrixAlgebra::amplified(2, 2);
        let omega = random_unit_vector(&mut r, 4);
        let other = MatrixAlgebra::generate(4, vec![alg.random_element(&mut r), alg.random_element(&mut r)]).unwrap();
        prop_assert_eq!(other.dim(), 4);
        let a = tomita(&alg, &omega).unwrap();
        let b = tomita(&other, &omega).unwrap();
        prop_assert!((&a.delta - &b.delta).norm() < 1e-9);
        prop_assert!((&a.j - &b.j).norm() < 1e-9);
    }

    #[test]
    fn free_product_modular_identities(seed in any::<u64>(), k in 1usize..=3, t in -10.0f64..10.0) {
        let mut r = rng(seed);
        let alg = MatrixAlgebra::amplified(2, 2);
        let mut seeds = Vec::new();
        let mut mds = BTreeMap::new();
        for l in 1..=k {
            let omega = random_unit_vector(&mut r, 4);
            seeds.push(SeedSpace::new(l, omega.clone()).unwrap());
            mds.insert(l, tomita(&alg, &omega).unwrap());
        }
        let fock = FockSpace::new(seeds, 3).unwrap();
        let free = FreeModular::new(&fock, mds).unwrap();
        let n = r.random_range(0..=3);
        let factors: Vec<(Label, CMatrix)> = (0..n).map(|_| (r.random_range(1..=k), alg.random_element(&mut r))).collect();
        let res = verify_with(&fock, &free, &MomentWord::new(factors), t).unwrap();
        prop_assert!(res.exact);
        prop_assert!(res.flow < 1e-8 && res.s_identity < 1e-8, "{:?}", res);
    }

    #[test]
    fn shift_decay_is_monotone(size in 8usize..40, lo_frac in 0.1f64..0.45, width_frac in 0.1f64..0.5, step in 1usize..=3, max_len in 1usize..=3) {
        let lo = ((size as f64) * lo_frac) as usize;
        let hi = (lo + ((size as f64) * width_frac).max(1.0) as usize).min(size - step);
        prop_assume!(lo < hi);
        let mut m = CMatrix::zeros(size, size);
        for j in 0..size - step {
            m[(j + step, j)] = C64::new(1.0, 0.0);
        }
        let model = GammaModel::new(m, (lo, hi)).unwrap();
        let models: BTreeMap<Label, GammaModel> = [(1, model.clone()), (2, model)].into();
        let table = gamma_decay_probe(&models, (2, max_len), 3 * size).unwrap();
        prop_assert!(table.is_nonincreasing(1e-12));
        let gap = hi - lo - 1;
        for (n, s) in table.max_by_step().iter().enumerate() {
            if n * step > gap {
                prop_assert_eq!(*s, 0.0);
            }
        }
    }
}
