use num_traits::One;
use proptest::prelude::*;

use ravenlab_core::measures::{
    carnap_measure, maher_measure, random_exchangeable_measure, random_measure, uniform_measure, CategoryPrior,
    MaherParams,
};
use ravenlab_core::model::{
    backgrounds, world_count, Background, BackgroundFamily, CategorySet, Proposition, World,
};
use ravenlab_core::prop_lang::parse;
use ravenlab_core::rational::{ratio, Rational};
use ravenlab_core::rules::{
    check_nc, check_pj, check_ra, example7_identity, group_pj_check, hypergeometric_check, setting2_checks,
    theorem1_premise, theorem1_sweep, theorem2_sweep, theorem4_residuals, xi_factors, Conclusion, PjMode, Relation,
};

/// Carnap world weight as a product of predictive probabilities.
fn chain(world: &World, lambda: &Rational, gamma: &CategoryPrior) -> Rational {
    let mut counts = [0i64; 4];
    let mut p = Rational::one();
    for (i, q) in world.categories().iter().enumerate() {
        let n_q = Rational::from_integer(counts[q.ordinal()].into());
        p *= (n_q + lambda * gamma.get(*q)) / (Rational::from_integer((i as i64).into()) + lambda);
        counts[q.ordinal()] += 1;
    }
    p
}

/// pr(A | B) by summing chain weights over worlds where the propositions hold.
fn carnap_oracle(n: usize, lambda: &Rational, a: &Proposition, b: &Proposition) -> Rational {
    let gamma = CategoryPrior::uniform();
    let (mut joint, mut given) = (Rational::from_integer(0.into()), Rational::from_integer(0.into()));
    for w in 0..world_count(n) {
        if b.holds_in(w, n) {
            let p = chain(&World::decode(n, w).unwrap(), lambda, &gamma);
            if a.holds_in(w, n) {
                joint += &p;
            }
            given += p;
        }
    }
    joint / given
}

#[test]
fn uniform_nc_confirms_with_hand_values() {
    let m = uniform_measure(2).unwrap();
    let v = check_nc(&m, &Proposition::top(), 1).unwrap();
    assert_eq!(v.relation, Relation::Confirms);
    // pr(H) = (3/4)^2, pr(H | FG_1) = 3/4.
    assert_eq!(v.lhs, Some(ratio(3, 4)));
    assert_eq!(v.rhs, Some(ratio(9, 16)));
}

#[test]
fn nc_is_undefined_when_background_settles_the_evidence() {
    let m = uniform_measure(2).unwrap();
    let v = check_nc(&m, &Proposition::fg(1), 1).unwrap();
    assert_eq!(v.relation, Relation::Undefined);
}

#[test]
fn maher_counterexample_point_disconfirms() {
    let m = maher_measure(2, &MaherParams::counterexample()).unwrap();
    let v = check_nc(&m, &Proposition::top(), 1).unwrap();
    assert_eq!(v.relation, Relation::Disconfirms);
    let sweep = theorem2_sweep(&m).unwrap();
    assert!(sweep.premise);
    assert_eq!(sweep.conclusion, Conclusion::Holds);
}

#[test]
fn uniform_pj_is_neutral() {
    let m = uniform_measure(3).unwrap();
    let d = parse("FG_3", 3).unwrap();
    let weak = check_pj(&m, CategorySet::G, 1, 2, &d, PjMode::Weak).unwrap();
    let strong = check_pj(&m, CategorySet::G, 1, 2, &d, PjMode::Strong).unwrap();
    assert_eq!(weak.conclusion, Conclusion::Holds);
    assert_eq!(strong.conclusion, Conclusion::Fails);
    assert_eq!(weak.lhs, weak.rhs);
}

#[test]
fn carnap_ra_holds_and_uniform_ra_fails() {
    let d = Proposition::top();
    let c = carnap_measure(3, &ratio(2, 1), &CategoryPrior::uniform()).unwrap();
    assert_eq!(check_ra(&c, 1, 2, &d).unwrap().conclusion, Conclusion::Holds);
    let u = uniform_measure(3).unwrap();
    assert_eq!(check_ra(&u, 1, 2, &d).unwrap().conclusion, Conclusion::Fails);
}

#[test]
fn carnap_theorem1_premise_for_lambda_at_least_one() {
    for n in 2..=4 {
        for lambda in [ratio(1, 1), ratio(2, 1), ratio(5, 1)] {
            let m = carnap_measure(n, &lambda, &CategoryPrior::uniform()).unwrap();
            let r = theorem1_sweep(&m).unwrap();
            assert!(r.premise, "N={n} lambda={lambda}: {r}");
            assert_eq!(r.conclusion, Conclusion::Holds);
        }
    }
}

#[test]
fn carnap_half_breaks_the_delta_premise_at_four() {
    let lambda = ratio(1, 2);
    let m = carnap_measure(3, &lambda, &CategoryPrior::uniform()).unwrap();
    assert!(theorem1_premise(&m).unwrap().holds);

    let m = carnap_measure(4, &lambda, &CategoryPrior::uniform()).unwrap();
    let p = theorem1_premise(&m).unwrap();
    assert!(!p.holds);
    let b = parse("G_3 . ~FG_4", 4).unwrap();
    let fng2 = Proposition::f_not_g(2);
    let lhs = carnap_oracle(4, &lambda, &fng2, &Proposition::fg(1).and(b.clone()));
    let rhs = carnap_oracle(4, &lambda, &fng2, &b);
    assert!(lhs > rhs);
    assert_eq!((lhs.clone(), rhs.clone()), (ratio(59, 532), ratio(3, 28)));
    assert_eq!((p.lhs, p.rhs), (Some(lhs), Some(rhs)));
    // NC is untouched by the premise failure.
    assert_eq!(theorem1_sweep(&m).unwrap().conclusion, Conclusion::NotEvaluated);
    for d in backgrounds(4, &[1], BackgroundFamily::SmallDelta) {
        assert_eq!(check_nc(&m, &d.to_proposition(), 1).unwrap().relation, Relation::Confirms);
    }
}

#[test]
fn example7_uniform_values() {
    let r = example7_identity(&uniform_measure(3).unwrap()).unwrap();
    // 4 of the 27 worlds of H have Exact(2)·FG_3; 2 have F_1·F_2·¬F_3·G_2.
    assert_eq!(r.conditional_lhs, Some(ratio(4, 27)));
    assert_eq!(r.conditional_rhs, Some(ratio(4, 27)));
    assert!(r.holds);
}

#[test]
fn hypergeometric_values() {
    for seed in 0..5 {
        let m = random_exchangeable_measure(4, seed).unwrap();
        for k in 1..=4 {
            let r = hypergeometric_check(&m, k, 1, 3).unwrap();
            assert_eq!(r.given_f_a, Some(ratio(k as i64 - 1, 3)));
            assert_eq!(r.plain, Some(ratio(k as i64, 4)));
        }
    }
}

#[test]
fn group_pj_never_violated() {
    for seed in 0..10 {
        let m = random_exchangeable_measure(4, seed).unwrap();
        for negative in [false, true] {
            let r = group_pj_check(&m, CategorySet::G, 1, &[2, 3], &Background::top(), negative).unwrap();
            assert!(!r.is_violation(), "{r}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn xi_product_decides_nc(seed in any::<u64>(), exch in any::<bool>(), pick in any::<usize>()) {
        let n = 3;
        let m = if exch { random_exchangeable_measure(n, seed) } else { random_measure(n, seed) }.unwrap();
        let ds: Vec<Background> = backgrounds(n, &[1], BackgroundFamily::SmallDelta).collect();
        let d = ds[pick % ds.len()].to_proposition();
        let v = check_nc(&m, &d, 1).unwrap();
        if let Ok(xi) = xi_factors(&m, &d, 1) {
            prop_assert_eq!(xi.product > Rational::one(), v.relation == Relation::Confirms);
        }
    }

    #[test]
    fn exchangeable_measures_satisfy_setting2(seed in any::<u64>(), n in 2usize..=4, k_pick in any::<usize>(), a_pick in any::<usize>()) {
        let m = random_exchangeable_measure(n, seed).unwrap();
        let k = 1 + k_pick % n;
        let a = 1 + a_pick % n;
        prop_assert!(theorem4_residuals(&m, k, a).unwrap().all_zero());
        let r = setting2_checks(&m, k, a).unwrap();
        prop_assert_eq!(r.violations(), 0);
    }

    #[test]
    fn maher_theorem2_never_violated(pf in 1i64..400, pg in 1i64..10) {
        let params = MaherParams::new(ratio(2, 1), ratio(1, 2), ratio(pf, 1000), ratio(pg, 10));
        let m = maher_measure(2, &params).unwrap();
        prop_assert!(!theorem2_sweep(&m).unwrap().is_violation());
        prop_assert!(!theorem1_sweep(&m).unwrap().is_violation());
    }
}
