use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ravenlab_core::acceptance::random_proposition;
use ravenlab_core::measures::{
    carnap_measure, iid_product_measure, maher_measure, measure_from_json, parse_measure_spec,
    random_exchangeable_measure, random_measure, uniform_measure, CategoryPrior, MaherParams, Provenance,
};
use ravenlab_core::model::{world_count, Event, Proposition, QCategory, World};
use ravenlab_core::rational::{ratio, Rational};
use ravenlab_core::rules::category_role_swap;

fn gammas() -> Vec<CategoryPrior> {
    vec![
        CategoryPrior::uniform(),
        CategoryPrior::new([ratio(1, 10), ratio(2, 10), ratio(3, 10), ratio(4, 10)]).unwrap(),
    ]
}

/// Product of successive predictive probabilities (n_q + λγ_q)/(i + λ).
fn carnap_chain(world: &World, lambda: &Rational, gamma: &CategoryPrior) -> Rational {
    let mut counts = [0i64; 4];
    let mut p = Rational::one();
    for (i, q) in world.categories().iter().enumerate() {
        let n_q = Rational::from_integer(counts[q.ordinal()].into());
        let i = Rational::from_integer((i as i64).into());
        p *= (n_q + lambda * gamma.get(*q)) / (i + lambda);
        counts[q.ordinal()] += 1;
    }
    p
}

#[test]
fn carnap_weights_match_sequential_predictive_product() {
    for n in 1..=3 {
        for lambda in [ratio(1, 2), ratio(2, 1), ratio(5, 1)] {
            for gamma in gammas() {
                let m = carnap_measure(n, &lambda, &gamma).unwrap();
                for w in 0..world_count(n) {
                    let world = World::decode(n, w).unwrap();
                    assert_eq!(m.weight(w), carnap_chain(&world, &lambda, &gamma), "N={n} w={world}");
                }
            }
        }
    }
}

#[test]
fn uniform_and_iid_weights() {
    let m = uniform_measure(3).unwrap();
    assert!((0..64).all(|w| m.weight(w) == ratio(1, 64)));
    let theta = gammas().pop().unwrap();
    let m = iid_product_measure(2, &theta).unwrap();
    for w in 0..16 {
        let world = World::decode(2, w).unwrap();
        let expected: Rational = world.categories().iter().map(|q| theta.get(*q).clone()).product();
        assert_eq!(m.weight(w), expected);
    }
}

#[test]
fn uniform_learning_is_impossible() {
    let m = uniform_measure(2).unwrap();
    let fng2 = Proposition::f_not_g(2).event(2).unwrap();
    let fg1 = Proposition::fg(1).event(2).unwrap();
    assert_eq!(m.conditional(&fng2, &fg1).unwrap(), ratio(1, 4));
    assert_eq!(m.probability(&fng2).unwrap(), ratio(1, 4));
}

#[test]
fn carnap_single_observation_predictive() {
    let m = parse_measure_spec("carnap:l=2,g=uniform").unwrap().build(2, 0).unwrap();
    let fng2 = Proposition::f_not_g(2).event(2).unwrap();
    let fg1 = Proposition::fg(1).event(2).unwrap();
    // (0 + 2·1/4)/(1 + 2)
    assert_eq!(m.conditional(&fng2, &fg1).unwrap(), ratio(1, 6));
}

#[test]
fn maher_unconditional_category_probabilities() {
    for pr_i in [ratio(1, 10), ratio(1, 2), ratio(9, 10)] {
        let params = MaherParams::new(ratio(2, 1), pr_i, ratio(1, 1000), ratio(1, 10));
        let m = maher_measure(3, &params).unwrap();
        let fng = Proposition::f_not_g(2).event(3).unwrap();
        assert_eq!(m.probability(&fng).unwrap(), ratio(1, 1000) * ratio(9, 10));
    }
}

#[test]
fn families_are_normalized_and_exchangeable() {
    let params = MaherParams::counterexample();
    let ms = vec![
        uniform_measure(3).unwrap(),
        carnap_measure(3, &ratio(1, 1), &CategoryPrior::uniform()).unwrap(),
        maher_measure(3, &params).unwrap(),
        random_exchangeable_measure(3, 11).unwrap(),
    ];
    for m in ms {
        let total: Rational = m.weights().into_iter().sum();
        assert!(total.is_one());
        assert!(m.is_exchangeable());
        assert!(m.is_regular());
    }
    assert!(!random_measure(3, 11).unwrap().is_exchangeable());
}

#[test]
fn role_swap_is_an_involution_and_swaps_categories() {
    let m = random_exchangeable_measure(3, 5).unwrap();
    let swap = category_role_swap();
    let once = m.relabel(swap, Provenance::RoleSwapped(Box::new(m.provenance().clone())));
    let twice = once.relabel(swap, Provenance::Custom);
    assert_eq!(twice.weights(), m.weights());
    let q1 = Proposition::category(1, QCategory::Q1).event(3).unwrap();
    let q4 = Proposition::category(1, QCategory::Q4).event(3).unwrap();
    assert_eq!(once.probability(&q1).unwrap(), m.probability(&q4).unwrap());
}

#[test]
fn measure_file_round_trips() {
    let m = random_measure(2, 9).unwrap();
    let back = measure_from_json(&m.to_json()).unwrap();
    assert_eq!(back.weights(), m.weights());
    assert!(measure_from_json(r#"{"n":1,"weights":["1/2","1/2","1/2","-1/2"]}"#).is_err());
    assert!(measure_from_json(r#"{"n":1,"weights":["1/2","1/2"]}"#).is_err());
}

#[test]
fn spec_errors() {
    for bad in ["carnap:l=0", "carnap", "maher:l=2,pi=1/2,pf=2,pg=1/10", "nope", "iid:q1=1/2"] {
        let built = parse_measure_spec(bad).and_then(|s| s.build(2, 0));
        assert!(built.is_err(), "{bad}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn probability_laws(seed in any::<u64>(), exch in any::<bool>()) {
        let n = 3;
        let m = if exch { random_exchangeable_measure(n, seed) } else { random_measure(n, seed) }.unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_proposition(&mut rng, n, 3).event(n).unwrap();
        let b = random_proposition(&mut rng, n, 3).event(n).unwrap();
        let p = |e: &Event| m.probability(e).unwrap();
        prop_assert!((p(&a) + p(&a.complement())).is_one());
        prop_assert_eq!(p(&a.union(&b)), p(&a) + p(&b) - p(&a.intersection(&b)));
        if !p(&b).is_zero() {
            let c = m.conditional(&a, &b).unwrap();
            prop_assert!(c >= Rational::zero() && c <= Rational::one());
            prop_assert_eq!(c * p(&b), p(&a.intersection(&b)));
        }
    }
}
