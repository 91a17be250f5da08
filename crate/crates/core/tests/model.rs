use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ravenlab_core::acceptance::random_proposition;
use ravenlab_core::model::{
    classify_background, combinations, enumerate_backgrounds, exact_event, exact_expansion, permute_proposition,
    world_count, BackgroundFamily, Event, Permutation, Proposition, QCategory, World,
};
use ravenlab_core::prop_lang::{format, parse};

#[test]
fn permutation_swaps_objects_in_atoms() {
    let rho = parse("F_1 | G_3", 3).unwrap();
    let pi = Permutation::new(vec![1, 3, 2]).unwrap();
    assert_eq!(format(&permute_proposition(&rho, &pi).unwrap()), "F_1 | G_2");
}

#[test]
fn delta_classification_examples() {
    let member = parse("FG_1 . FG_3 . F>G_4", 4).unwrap();
    let c = classify_background(&member, 4).unwrap();
    assert!(c.is_delta() && !c.is_small_delta());
    assert_eq!(c.inds().into_iter().collect::<Vec<_>>(), vec![1, 3, 4]);

    let disjunction = parse("FG_1 | FnG_3", 3).unwrap();
    assert!(!classify_background(&disjunction, 3).unwrap().is_delta());

    let small = parse("FG_1 . nFG_2 . nFnG_3", 3).unwrap();
    assert!(classify_background(&small, 3).unwrap().is_small_delta());

    // {Q1, Q4} is not one of the twelve expressible constraints.
    let diagonal = parse("FG_1 | nFnG_1", 1).unwrap();
    assert!(!classify_background(&diagonal, 1).unwrap().is_delta());
}

#[test]
fn background_enumeration_counts() {
    let e = enumerate_backgrounds(2, &[1, 2], BackgroundFamily::Delta, None).unwrap();
    assert_eq!(e.members, vec![Proposition::top()]);
    let e = enumerate_backgrounds(3, &[1, 2], BackgroundFamily::Delta, None).unwrap();
    assert_eq!(e.members.len(), 13);
    let e = enumerate_backgrounds(3, &[3], BackgroundFamily::SmallDelta, None).unwrap();
    assert_eq!(e.members.len(), 16);
    let e = enumerate_backgrounds(3, &[], BackgroundFamily::Delta, Some(5)).unwrap();
    assert_eq!(e.members.len(), 5);
    assert!(e.truncated);
}

#[test]
fn every_enumerated_member_classifies_back() {
    for family in [BackgroundFamily::Delta, BackgroundFamily::SmallDelta] {
        for p in enumerate_backgrounds(3, &[2], family, None).unwrap().members {
            let c = classify_background(&p, 3).unwrap();
            assert!(c.is_delta(), "{}", format(&p));
            let complete = c.constraints.values().all(|s| s.singleton().is_some_and(|q| q != QCategory::Q2));
            assert_eq!(c.is_small_delta(), complete, "{}", format(&p));
            if family == BackgroundFamily::SmallDelta {
                assert!(c.is_small_delta(), "{}", format(&p));
            }
        }
    }
}

#[test]
fn exact_two_of_four_has_six_cells() {
    let pairs = combinations(4, 2).unwrap();
    assert_eq!(pairs, vec![vec![1, 2], vec![1, 3], vec![1, 4], vec![2, 3], vec![2, 4], vec![3, 4]]);
    let expansion = exact_expansion(2, 4).unwrap();
    assert_eq!(expansion.event(4).unwrap(), exact_event(2, 4).unwrap());
    // C(4,2) F-patterns, each with 2^4 G-patterns.
    assert_eq!(exact_event(2, 4).unwrap().len(), 6 * 16);
}

#[test]
fn world_encoding_round_trips() {
    for n in 1..=3 {
        for w in 0..world_count(n) {
            assert_eq!(World::decode(n, w).unwrap().encode(), w);
        }
    }
}

proptest! {
    #[test]
    fn permutations_preserve_world_counts(seed in any::<u64>(), k in 0usize..6) {
        let n = 3;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_proposition(&mut rng, n, 3);
        let all = Permutation::all(n);
        let pi = &all[k % all.len()];
        let q = permute_proposition(&p, pi).unwrap();
        let (ep, eq): (Event, Event) = (p.event(n).unwrap(), q.event(n).unwrap());
        prop_assert_eq!(ep.len(), eq.len());
        prop_assert_eq!(pi.apply_to_event(&ep), eq);
        let back = permute_proposition(&q, &pi.inverse()).unwrap();
        prop_assert_eq!(back.event(n).unwrap(), ep);
    }
}
