mod support;

use std::collections::BTreeSet;

use filie::preorder::Preorder;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::{cycle_oracle, fixtures, library_classes, random_preorder};

fn order(max: usize) -> impl Strategy<Value = Preorder> {
    any::<u64>().prop_map(move |seed| random_preorder(&mut ChaCha8Rng::seed_from_u64(seed), max))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn closure_is_a_preorder(n in 1usize..8, pairs in prop::collection::vec((0usize..8, 0usize..8), 0..16)) {
        let pairs: Vec<_> = pairs.into_iter().filter(|&(x, y)| x < n && y < n).collect();
        let p = Preorder::from_generators(n, pairs.iter().copied()).unwrap();
        for x in 0..n {
            prop_assert!(p.leq(x, x));
            for y in 0..n {
                for z in 0..n {
                    prop_assert!(!(p.leq(x, y) && p.leq(y, z)) || p.leq(x, z));
                }
            }
        }
        for &(x, y) in &pairs {
            prop_assert!(p.leq(x, y));
        }
        // the closure is already closed
        let again = Preorder::from_relation(n, p.pairs()).unwrap();
        prop_assert_eq!(again, p);
    }

    #[test]
    fn blocks_match_cycle_enumeration(p in order(7)) {
        prop_assert_eq!(library_classes(&p), cycle_oracle(&p));
    }

    #[test]
    fn classification_shape(p in order(7)) {
        let c = p.edge_classes();
        let strict: BTreeSet<_> = p.strict_pairs().collect();
        let mut seen = BTreeSet::new();
        for (i, class) in c.classes().iter().enumerate() {
            for &(x, y) in &class.edges {
                prop_assert!(seen.insert((x, y)));
                prop_assert_eq!(c.class_of(x, y), Some(i));
                prop_assert_eq!(c.component_of(x), class.component);
                prop_assert_eq!(c.component_of(y), class.component);
                if p.equivalent(x, y) {
                    prop_assert_eq!(c.class_of(y, x), Some(i));
                }
            }
            for &v in &class.vertices {
                prop_assert!(c.classes_at(v).contains(&i));
            }
        }
        prop_assert_eq!(seen, strict);
        let mut labels = BTreeSet::new();
        for members in c.components().iter() {
            for &x in members {
                prop_assert!(labels.insert(x));
            }
        }
        prop_assert_eq!(labels.len(), p.size());
    }

    #[test]
    fn v_set_laws(p in order(6)) {
        let c = p.edge_classes();
        for x in 0..p.size() {
            let at: Vec<usize> = c.classes_at(x).iter().copied().collect();
            for &i in &at {
                let v = c.v_set(x, i).unwrap();
                prop_assert!(v.is_superset(&c.classes()[i].vertices));
                for &j in &at {
                    if i != j {
                        let meet: BTreeSet<_> = v.intersection(&c.v_set(x, j).unwrap()).copied().collect();
                        prop_assert_eq!(meet, BTreeSet::from([x]));
                    }
                }
            }
        }
    }

    #[test]
    fn vx_blocks_partition_the_component(p in order(6)) {
        let c = p.edge_classes();
        for (i, class) in c.classes().iter().enumerate() {
            let part = c.vx_partition(i).unwrap();
            let host: BTreeSet<usize> = c.components().members(class.component).unwrap().iter().copied().collect();
            let mut union = BTreeSet::new();
            for (x, block) in &part {
                prop_assert!(class.vertices.contains(x));
                prop_assert!(block.contains(x));
                // outside the class only
                prop_assert!(block.iter().all(|v| v == x || !class.vertices.contains(v)));
                for &v in block {
                    prop_assert!(union.insert(v));
                }
            }
            prop_assert_eq!(union, host);
        }
    }
}

#[test]
fn fixtures_match_the_oracle() {
    for (name, p) in fixtures() {
        assert_eq!(library_classes(&p), cycle_oracle(&p), "{name}");
    }
}

#[test]
fn crown_is_one_class() {
    // 0,1 below 2,3: the comparability graph is a 4-cycle
    let p = Preorder::from_generators(4, [(0, 2), (0, 3), (1, 2), (1, 3)]).unwrap();
    assert_eq!(p.edge_classes().num_classes(), 1);
    assert_eq!(cycle_oracle(&p).len(), 1);
}

#[test]
fn equivalent_pair_blocks_are_points() {
    let p = Preorder::from_generators(4, [(0, 1), (1, 0), (1, 2), (2, 3)]).unwrap();
    let c = p.edge_classes();
    let i = c.class_of(0, 1).unwrap();
    let part = c.vx_partition(i).unwrap();
    for (x, block) in part {
        assert_eq!(block, BTreeSet::from([x]));
    }
}
