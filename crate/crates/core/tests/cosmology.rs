use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ravenlab_core::acceptance::random_proposition;
use ravenlab_core::cosmology::{
    assumption_check, cylinder, mixture_from_json, mixture_probability, proposition1_check, random_iid_mixture,
    random_mixture, size_posterior, uniform_size_prior, MixtureModel,
};
use ravenlab_core::measures::{iid_product_measure, uniform_measure, CategoryPrior};
use ravenlab_core::model::Proposition;
use ravenlab_core::rational::{ratio, Rational};
use ravenlab_core::rules::{check_nc, Conclusion, Relation};

fn uniform_mix(alpha: usize, beta: usize) -> MixtureModel {
    MixtureModel::from_family(alpha, beta, uniform_size_prior(alpha, beta), uniform_measure).unwrap()
}

#[test]
fn total_probability_of_h_over_two_sizes() {
    // 1/2·(3/4)^2 + 1/2·(3/4)^3 = 36/128 + 27/128
    let p = mixture_probability(&uniform_mix(2, 3), &Proposition::H).unwrap();
    assert_eq!(p, ratio(63, 128));
}

#[test]
fn posterior_tilts_toward_small_universes_under_h() {
    let post = size_posterior(&uniform_mix(2, 3), &Proposition::H).unwrap();
    assert_eq!(post[&2], ratio(4, 7));
    assert_eq!(post[&3], ratio(3, 7));
    let prior = size_posterior(&uniform_mix(2, 3), &Proposition::top()).unwrap();
    assert_eq!(prior, uniform_size_prior(2, 3));
}

#[test]
fn iid_posterior_ignores_evidence_over_shared_objects() {
    let mix = random_iid_mixture(2, 5, 3).unwrap();
    let post = size_posterior(&mix, &Proposition::fg(1).and(Proposition::not_f(2))).unwrap();
    assert_eq!(&post, mix.q());
    assert!(assumption_check(&mix, &Proposition::fg(1), &Proposition::top()).unwrap().holds);
}

#[test]
fn size_dependent_components_break_the_assumption() {
    let theta = |a, b| CategoryPrior::new([ratio(a, 10), ratio(b, 10), ratio(1, 10), ratio(9 - a - b, 10)]).unwrap();
    let q: BTreeMap<usize, Rational> = uniform_size_prior(2, 3);
    let mix = MixtureModel::from_family(2, 3, q, |size| {
        iid_product_measure(size, &if size == 2 { theta(1, 2) } else { theta(5, 1) })
    })
    .unwrap();
    let r = assumption_check(&mix, &Proposition::fg(1), &Proposition::top()).unwrap();
    assert!(!r.holds);
    let p1 = proposition1_check(&mix, &Proposition::fg(1), &Proposition::top()).unwrap();
    assert!(!p1.premise);
    assert_eq!(p1.conclusion, Conclusion::NotEvaluated);
}

#[test]
fn single_size_reduces_to_nc() {
    let mix = MixtureModel::from_family(3, 3, uniform_size_prior(3, 3), uniform_measure).unwrap();
    let r = proposition1_check(&mix, &Proposition::fg(1), &Proposition::top()).unwrap();
    let nc = check_nc(&uniform_measure(3).unwrap(), &Proposition::top(), 1).unwrap();
    assert_eq!(nc.relation, Relation::Confirms);
    assert!(r.premise);
    assert_eq!(r.conclusion, Conclusion::Holds);
    assert_eq!((r.lhs, r.rhs), (nc.lhs, nc.rhs));
}

#[test]
fn objects_beyond_alpha_are_rejected() {
    assert!(mixture_probability(&uniform_mix(2, 3), &Proposition::f(3)).is_err());
}

#[test]
fn mixture_file_format() {
    let text = r#"{"alpha":2,"beta":3,"q":{"2":"1/2","3":"1/2"},"components":{"2":"uniform","3":"uniform"}}"#;
    let mix = mixture_from_json(text, 0).unwrap();
    assert_eq!(mixture_probability(&mix, &Proposition::H).unwrap(), ratio(63, 128));
    let missing = r#"{"alpha":2,"beta":3,"q":{"2":"1/2","3":"1/2"},"components":{"2":"uniform"}}"#;
    assert!(mixture_from_json(missing, 0).is_err());
    let unnormalized = r#"{"alpha":2,"beta":2,"q":{"2":"1/2"},"components":{"2":"uniform"}}"#;
    assert!(mixture_from_json(unnormalized, 0).is_err());
}

/// Mentions only named objects; H and Exact(k) range over the whole universe.
fn is_local(p: &Proposition) -> bool {
    match p {
        Proposition::H | Proposition::Exact(_) => false,
        Proposition::Atom { .. } => true,
        Proposition::Not(inner) => is_local(inner),
        Proposition::And(items) | Proposition::Or(items) => items.iter().all(is_local),
        Proposition::Implies(a, b) => is_local(a) && is_local(b),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn slices_are_cylinders_and_restriction_matches_components(seed in any::<u64>()) {
        let (alpha, beta) = (2, 4);
        let mix = random_mixture(alpha, beta, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = random_proposition(&mut rng, alpha, 3);
        prop_assume!(is_local(&rho));
        let omega = mix.generalized_event(&rho).unwrap();
        let base = rho.event(alpha).unwrap();
        let mut total = Rational::from_integer(0.into());
        for size in alpha..=beta {
            let slice = omega.slice(size).unwrap();
            prop_assert_eq!(slice, &cylinder(&base, size));
            let component = mix.component(size).unwrap().probability(slice).unwrap();
            prop_assert_eq!(mix.probability_given_size(&omega, size).unwrap(), component.clone());
            total += &mix.q()[&size] * component;
        }
        prop_assert_eq!(mix.probability(&omega), total);
    }

    #[test]
    fn proposition1_never_violated(seed in any::<u64>(), iid in any::<bool>()) {
        let mix = if iid { random_iid_mixture(2, 4, seed) } else { random_mixture(2, 4, seed) }.unwrap();
        let r = proposition1_check(&mix, &Proposition::fg(1), &Proposition::top()).unwrap();
        prop_assert!(!r.is_violation(), "{}", r);
    }
}
