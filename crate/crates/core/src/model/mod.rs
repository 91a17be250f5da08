//! Finite universes, worlds, propositions, events and permutations.
//!
//! A universe of size `n` has objects `1..=n`. A world assigns one
//! [`QCategory`] to every object and is encoded as an integer in
//! `[0, 4^n)` with two bits per object (object 1 in the lowest bits,
//! `FG = 11`, `FnG = 10`, `nFG = 01`, `nFnG = 00`).

mod background;
mod category;
mod event;
mod permutation;
mod proposition;
mod world;

pub use background::{
    background_count, backgrounds, classify_background, enumerate_backgrounds, Background,
    BackgroundEnumeration, BackgroundFamily, DeltaClass, DeltaKind,
};
pub use category::{CategorySet, QCategory, PREDICATE_NAMES};
pub use event::{world_count, Event};
pub use permutation::{permute_proposition, Permutation};
pub use proposition::Proposition;
pub use world::{category_code, code_counts, f_count, World};

use thiserror::Error;

/// Largest universe whose events are materialized (4^12 bits ≈ 2 MB).
pub const MAX_UNIVERSE: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("object {object} is outside the universe 1..={n}")]
    ObjectOutOfRange { object: usize, n: usize },
    #[error("universe size {0} is outside 1..={MAX_UNIVERSE}")]
    UniverseSize(usize),
    #[error("world index {index} is outside [0, 4^{n})")]
    WorldOutOfRange { index: usize, n: usize },
    #[error("count {k} is outside 0..={n}")]
    CountOutOfRange { k: usize, n: usize },
    #[error("atom on object {object} has an empty constraint")]
    EmptyConstraint { object: usize },
    #[error("mapping {0:?} is not a bijection")]
    NotABijection(Vec<usize>),
    #[error("malformed event dump: {0}")]
    BadEventDump(String),
}

pub(crate) fn check_universe(n: usize) -> Result<(), ModelError> {
    if (1..=MAX_UNIVERSE).contains(&n) {
        Ok(())
    } else {
        Err(ModelError::UniverseSize(n))
    }
}

/// `{w : w ⊨ prop}` over a universe of size `n`.
pub fn event_of(prop: &Proposition, n: usize) -> Result<Event, ModelError> {
    prop.event(n)
}

/// All size-`k` subsets of `{1..n}` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Result<Vec<Vec<usize>>, ModelError> {
    if k > n {
        return Err(ModelError::CountOutOfRange { k, n });
    }
    let mut out = Vec::new();
    let mut current: Vec<usize> = (1..=k).collect();
    loop {
        out.push(current.clone());
        // Rightmost position that can still advance.
        let Some(i) = (0..k).rev().find(|&i| current[i] < n - (k - 1 - i)) else {
            break;
        };
        current[i] += 1;
        for j in i + 1..k {
            current[j] = current[j - 1] + 1;
        }
    }
    Ok(out)
}

/// Worlds in which exactly the objects of `subset` satisfy F.
pub fn z_event(subset: &[usize], n: usize) -> Result<Event, ModelError> {
    check_universe(n)?;
    if let Some(&b) = subset.iter().find(|&&b| b == 0 || b > n) {
        return Err(ModelError::ObjectOutOfRange { object: b, n });
    }
    let mask = subset.iter().fold(0usize, |m, &b| m | (0b10 << (2 * (b - 1))));
    let all_f = (0..n).fold(0usize, |m, i| m | (0b10 << (2 * i)));
    Ok(Event::from_fn(n, |w| w & all_f == mask))
}

/// Z-proposition for a subset: F on its members, ¬F elsewhere.
pub fn z_proposition(subset: &[usize], n: usize) -> Proposition {
    Proposition::And(
        (1..=n)
            .map(|b| {
                if subset.contains(&b) {
                    Proposition::f(b)
                } else {
                    Proposition::not_f(b)
                }
            })
            .collect(),
    )
}

/// Exactly `k` objects satisfy F.
pub fn exact_event(k: usize, n: usize) -> Result<Event, ModelError> {
    check_universe(n)?;
    Ok(proposition::exact_event_unchecked(n, k))
}

/// The disjunction-of-Z-propositions expansion of Exact(k).
pub fn exact_expansion(k: usize, n: usize) -> Result<Proposition, ModelError> {
    Ok(Proposition::Or(
        combinations(n, k)?
            .iter()
            .map(|c| z_proposition(c, n))
            .collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairs_of_four() {
        let pairs = combinations(4, 2).unwrap();
        assert_eq!(
            pairs,
            vec![vec![1, 2], vec![1, 3], vec![1, 4], vec![2, 3], vec![2, 4], vec![3, 4]]
        );
        assert_eq!(combinations(3, 0).unwrap(), vec![Vec::<usize>::new()]);
        assert_eq!(combinations(5, 5).unwrap(), vec![vec![1, 2, 3, 4, 5]]);
        assert!(combinations(2, 3).is_err());
    }

    #[test]
    fn combination_counts_are_binomial() {
        for n in 1..=7 {
            for k in 0..=n {
                let binom = (1..=k).fold(1usize, |acc, i| acc * (n + 1 - i) / i);
                assert_eq!(combinations(n, k).unwrap().len(), binom);
            }
        }
    }

    #[test]
    fn z_event_examples() {
        let z = z_event(&[1, 2], 3).unwrap();
        assert_eq!(z.len(), 8);
        let expected = Proposition::f(1)
            .and(Proposition::f(2))
            .and(Proposition::not_f(3))
            .event(3)
            .unwrap();
        assert_eq!(z, expected);
        let empty = z_event(&[], 2).unwrap();
        assert_eq!(empty, Proposition::not_f(1).and(Proposition::not_f(2)).event(2).unwrap());
        assert!(z_event(&[4], 3).is_err());
    }

    #[test]
    fn exact_is_the_union_of_z_events() {
        for n in 1..=5 {
            for k in 0..=n {
                let union = combinations(n, k)
                    .unwrap()
                    .iter()
                    .fold(Event::empty(n), |acc, c| acc.union(&z_event(c, n).unwrap()));
                assert_eq!(union, exact_event(k, n).unwrap());
                assert_eq!(union, Proposition::Exact(k).event(n).unwrap());
            }
        }
    }

    #[test]
    fn exact_two_of_four_matches_six_disjuncts() {
        let expansion = exact_expansion(2, 4).unwrap();
        match &expansion {
            Proposition::Or(parts) => assert_eq!(parts.len(), 6),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(expansion.event(4).unwrap(), Proposition::Exact(2).event(4).unwrap());
    }
}
