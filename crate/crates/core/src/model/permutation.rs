use std::fmt;

use super::world::category_code;
use super::{Event, ModelError, Proposition};

/// Bijection of {1..n}; `mapping[b - 1]` is the image of object b.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    mapping: Vec<usize>,
}

impl Permutation {
    pub fn new(mapping: Vec<usize>) -> Result<Permutation, ModelError> {
        let n = mapping.len();
        let mut seen = vec![false; n];
        for &image in &mapping {
            if image == 0 || image > n || std::mem::replace(&mut seen[image - 1], true) {
                return Err(ModelError::NotABijection(mapping.clone()));
            }
        }
        Ok(Permutation { mapping })
    }

    pub fn identity(n: usize) -> Permutation {
        Permutation { mapping: (1..=n).collect() }
    }

    /// Swaps objects `i` and `j`.
    pub fn transposition(n: usize, i: usize, j: usize) -> Result<Permutation, ModelError> {
        let mut mapping: Vec<usize> = (1..=n).collect();
        if i == 0 || j == 0 || i > n || j > n {
            return Err(ModelError::ObjectOutOfRange { object: i.max(j), n });
        }
        mapping.swap(i - 1, j - 1);
        Ok(Permutation { mapping })
    }

    /// All n! permutations in lexicographic order of their mappings.
    pub fn all(n: usize) -> Vec<Permutation> {
        let mut current: Vec<usize> = (1..=n).collect();
        let mut out = vec![Permutation { mapping: current.clone() }];
        while next_permutation(&mut current) {
            out.push(Permutation { mapping: current.clone() });
        }
        out
    }

    pub fn len(&self) -> usize {
        self.mapping.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mapping.is_empty()
    }

    pub fn apply(&self, object: usize) -> usize {
        self.mapping[object - 1]
    }

    pub fn mapping(&self) -> &[usize] {
        &self.mapping
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.mapping.len()];
        for (i, &image) in self.mapping.iter().enumerate() {
            inv[image - 1] = i + 1;
        }
        Permutation { mapping: inv }
    }

    /// The world in which object π(b) carries the category object b had.
    pub fn apply_to_world(&self, world: usize) -> usize {
        self.mapping.iter().enumerate().fold(0usize, |acc, (i, &image)| {
            acc | ((category_code(world, i + 1) as usize) << (2 * (image - 1)))
        })
    }

    pub fn apply_to_event(&self, event: &Event) -> Event {
        let mut out = Event::empty(event.universe_size());
        for w in event.iter() {
            out.insert(self.apply_to_world(w));
        }
        out
    }

    pub fn apply_to_set(&self, objects: &[usize]) -> Vec<usize> {
        let mut out: Vec<usize> = objects.iter().map(|&b| self.apply(b)).collect();
        out.sort_unstable();
        out
    }
}

impl fmt::Display for Permutation {
    /// Non-fixed points in the `{2/3; 3/2}` notation.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let moved: Vec<String> = self
            .mapping
            .iter()
            .enumerate()
            .filter(|(i, &image)| i + 1 != image)
            .map(|(i, image)| format!("{}/{}", i + 1, image))
            .collect();
        write!(f, "{{{}}}", moved.join("; "))
    }
}

fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// ρ^π: every atom's object b becomes π(b).
pub fn permute_proposition(prop: &Proposition, pi: &Permutation) -> Result<Proposition, ModelError> {
    if let Some(max) = prop.max_object() {
        if max > pi.len() {
            return Err(ModelError::ObjectOutOfRange { object: max, n: pi.len() });
        }
    }
    Ok(prop.map_objects(&|b| pi.apply(b)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CategorySet;

    #[test]
    fn rejects_non_bijections() {
        assert!(Permutation::new(vec![1, 1, 2]).is_err());
        assert!(Permutation::new(vec![0, 1]).is_err());
        assert!(Permutation::new(vec![3, 1]).is_err());
        assert!(Permutation::new(vec![2, 3, 1]).is_ok());
    }

    #[test]
    fn swapping_two_and_three() {
        let pi = Permutation::new(vec![1, 3, 2]).unwrap();
        assert_eq!(pi.to_string(), "{2/3; 3/2}");
        let rho = Proposition::f(1).or(Proposition::g(3));
        let permuted = permute_proposition(&rho, &pi).unwrap();
        assert_eq!(permuted, Proposition::f(1).or(Proposition::g(2)));
        assert_eq!(
            permuted,
            Proposition::Or(vec![Proposition::atom(1, CategorySet::F), Proposition::atom(2, CategorySet::G)])
        );
    }

    #[test]
    fn all_permutations_count() {
        assert_eq!(Permutation::all(4).len(), 24);
        assert_eq!(Permutation::all(1).len(), 1);
        let pi = Permutation::new(vec![3, 1, 2]).unwrap();
        assert_eq!(pi.inverse().apply(pi.apply(2)), 2);
    }
}
