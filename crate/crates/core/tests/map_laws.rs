mod support;

use std::collections::BTreeMap;
use std::sync::Arc;

use filie::algebra::{Algebra, FiElement};
use filie::decompose::decompose;
use filie::maps::{MapCombination, MapSpec, SharedMap, TransitiveMap};
use filie::ring::{AdditiveDerivation, IntPoly, RingDescriptor, RingValue};
use filie::verify::{
    check_central_annihilating, check_derivation, check_lie_n_derivation, ProbeBudget, Probes,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::{random_preorder, Structured};

const RING: RingDescriptor = RingDescriptor::IntPoly;

fn setup(seed: u64, max: usize) -> (Arc<Algebra>, Structured, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alg = Algebra::new(random_preorder(&mut rng, max), RING);
    let s = Structured::random(&alg, &mut rng);
    (alg, s, rng)
}

fn derivation_shaped(alg: &Arc<Algebra>, s: &Structured, rng: &mut ChaCha8Rng) -> MapSpec {
    let alpha = alg.from_entries(s.alpha.iter().cloned()).unwrap();
    let f = TransitiveMap::new(
        alg,
        s.f.iter().map(|(&(x, y), &v)| (x, y, RingValue::from_i64(RING, v))),
    )
    .unwrap();
    let proper: BTreeMap<usize, AdditiveDerivation> = (0..alg.components().count())
        .map(|j| {
            let c: Vec<i64> = (0..rng.gen_range(1..=3)).map(|_| rng.gen_range(-2..=2)).collect();
            (j, AdditiveDerivation::poly_times_ddt(IntPoly::from_i64s(&c)))
        })
        .collect();
    MapSpec::inner(alpha)
        .plus(MapSpec::transitive(f))
        .unwrap()
        .plus(MapSpec::make_proper_part(alg, proper).unwrap())
        .unwrap()
}

fn random_elements(alg: &Arc<Algebra>, seed: u64, k: usize) -> Vec<FiElement> {
    let budget = ProbeBudget::new(RING, seed, 0);
    let probes = Probes::new(alg, &budget);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..k).map(|_| probes.random_element(&mut rng)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn structured_maps_are_lie_n_derivations(seed in any::<u64>(), n in 2u64..=4) {
        let (alg, s, _) = setup(seed, 4);
        let l = s.spec(&alg);
        let v = check_lie_n_derivation(&l, &alg, n, &ProbeBudget::new(RING, seed, 40)).unwrap();
        prop_assert!(v.passed(), "{}", v);
    }

    #[test]
    fn derivation_shaped_maps_satisfy_leibniz(seed in any::<u64>()) {
        let (alg, s, mut rng) = setup(seed, 5);
        let d = derivation_shaped(&alg, &s, &mut rng);
        prop_assert!(d.is_derivation_shaped());
        let v = check_derivation(&d, &alg, &ProbeBudget::new(RING, seed, 100)).unwrap();
        prop_assert!(v.passed(), "{}", v);
        prop_assert!(d.eval(&alg.zero()).unwrap().is_zero());
    }

    #[test]
    fn zero_has_no_strict_image(seed in any::<u64>()) {
        let (alg, s, _) = setup(seed, 5);
        let image = s.spec(&alg).eval(&alg.zero()).unwrap();
        prop_assert!(image.strict_part().is_zero());
        if let Some(w) = filie::properness::emit_witness(&alg).unwrap() {
            prop_assert!(w.eval(&alg.zero()).unwrap().strict_part().is_zero());
        }
    }

    #[test]
    fn inner_is_the_commutator(seed in any::<u64>()) {
        let (alg, s, _) = setup(seed, 5);
        let alpha = alg.from_entries(s.alpha.iter().cloned()).unwrap();
        let inner = MapSpec::inner(alpha.clone());
        for beta in random_elements(&alg, seed, 10) {
            let expected = &alpha.convolve(&beta).unwrap() - &beta.convolve(&alpha).unwrap();
            prop_assert_eq!(inner.eval(&beta).unwrap(), expected);
        }
    }

    #[test]
    fn central_trace_is_central_and_annihilating(seed in any::<u64>(), n in 2u64..=3) {
        let (alg, s, _) = setup(seed, 5);
        let h = MapSpec::central_trace(&alg, s.h.clone()).unwrap();
        let v = check_central_annihilating(&h, &alg, n, &ProbeBudget::new(RING, seed, 60)).unwrap();
        prop_assert!(v.passed(), "{}", v);
    }

    #[test]
    fn corners_are_antisymmetric(seed in any::<u64>()) {
        let (alg, s, _) = setup(seed, 5);
        let l = s.spec(&alg);
        for (x, y) in alg.preorder().strict_pairs() {
            let a = l.eval(&alg.basis(x, x).unwrap()).unwrap().get(x, y);
            let b = l.eval(&alg.basis(y, y).unwrap()).unwrap().get(x, y);
            prop_assert_eq!(a, -&b);
        }
    }

    #[test]
    fn falsifier_is_deterministic_and_reproducible(seed in any::<u64>()) {
        let (alg, s, _) = setup(seed, 4);
        let l: SharedMap = Arc::new(s.spec(&alg));
        let square: SharedMap = Arc::new(|b: &FiElement| b.convolve(b).unwrap());
        let broken = MapCombination::of(Arc::clone(&l)).plus(square);
        let budget = ProbeBudget::new(RING, seed, 20);
        let first = check_lie_n_derivation(&broken, &alg, 2, &budget).unwrap();
        let second = check_lie_n_derivation(&broken, &alg, 2, &budget).unwrap();
        prop_assert_eq!(&first, &second);
        // on an antichain every bracket vanishes and squaring goes unnoticed
        let antichain = alg.preorder().strict_pairs().next().is_none();
        prop_assert_eq!(first.passed(), antichain);
        if let Some(c) = first.counterexample() {
            prop_assert!(c.reproduces(&broken));
        }
        let clean = check_lie_n_derivation(l.as_ref(), &alg, 2, &budget).unwrap();
        prop_assert!(clean.passed());
    }

    #[test]
    fn decomposition_ignores_central_summands(seed in any::<u64>(), extra in prop::collection::vec(-3i64..=3, 1..4)) {
        let (alg, s, _) = setup(seed, 5);
        let l = s.spec(&alg);
        let mut coeffs = extra;
        coeffs.insert(0, 0);
        let h: BTreeMap<usize, IntPoly> = (0..alg.components().count())
            .map(|j| (j, IntPoly::from_i64s(&coeffs)))
            .collect();
        let shifted = l.clone().plus(MapSpec::central_trace(&alg, h).unwrap()).unwrap();
        let budget = ProbeBudget::new(RING, seed, 30);
        let a = decompose(Arc::new(l), &alg, 2, &budget).unwrap();
        let b = decompose(Arc::new(shifted), &alg, 2, &budget).unwrap();
        prop_assert!(a.decomposable() && b.decomposable());
        prop_assert_eq!(&a.e_l, &b.e_l);
        prop_assert_eq!(&a.f_table, &b.f_table);
        prop_assert_eq!(&a.gauge, &b.gauge);
        prop_assert_eq!(&a.fitted, &b.fitted);
    }

    #[test]
    fn redecomposing_the_structured_part_is_idempotent(seed in any::<u64>()) {
        let (alg, s, _) = setup(seed, 4);
        let budget = ProbeBudget::new(RING, seed, 20);
        let first = decompose(Arc::new(s.spec(&alg)), &alg, 2, &budget).unwrap();
        let structured = first.structured_part().unwrap();
        let second = decompose(Arc::new(structured.clone()), &alg, 2, &budget).unwrap();
        let third = decompose(Arc::new(second.structured_part().unwrap()), &alg, 2, &budget).unwrap();
        prop_assert!(second.same_outcome(&third));
        prop_assert_eq!(&first.e_l, &second.e_l);
        prop_assert_eq!(&first.f_table, &second.f_table);
        prop_assert_eq!(&first.fitted, &second.fitted);
        for beta in random_elements(&alg, seed, 10) {
            prop_assert_eq!(
                second.recomposition().apply(&beta),
                structured.eval(&beta).unwrap()
            );
        }
    }
}
