use std::collections::BTreeSet;
use std::fmt;

use super::world::{category_code, f_count};
use super::{check_universe, CategorySet, Event, ModelError, QCategory};

/// Sentence of the two-predicate language. Objects are 1-based. `And(vec![])`
/// is the tautology and `Or(vec![])` the contradiction.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Proposition {
    /// The object's category lies in `allowed` (never empty).
    Atom { object: usize, allowed: CategorySet },
    Not(Box<Proposition>),
    And(Vec<Proposition>),
    Or(Vec<Proposition>),
    Implies(Box<Proposition>, Box<Proposition>),
    /// Every object satisfies F→G.
    H,
    /// Exactly k objects satisfy F.
    Exact(usize),
}

impl Proposition {
    pub fn top() -> Proposition {
        Proposition::And(Vec::new())
    }

    pub fn bottom() -> Proposition {
        Proposition::Or(Vec::new())
    }

    pub fn atom(object: usize, allowed: CategorySet) -> Proposition {
        Proposition::Atom { object, allowed }
    }

    pub fn category(object: usize, q: QCategory) -> Proposition {
        Proposition::atom(object, CategorySet::single(q))
    }

    pub fn f(object: usize) -> Proposition {
        Proposition::atom(object, CategorySet::F)
    }

    pub fn g(object: usize) -> Proposition {
        Proposition::atom(object, CategorySet::G)
    }

    pub fn not_f(object: usize) -> Proposition {
        Proposition::atom(object, CategorySet::NOT_F)
    }

    pub fn not_g(object: usize) -> Proposition {
        Proposition::atom(object, CategorySet::NOT_G)
    }

    pub fn fg(object: usize) -> Proposition {
        Proposition::category(object, QCategory::Q1)
    }

    pub fn f_not_g(object: usize) -> Proposition {
        Proposition::category(object, QCategory::Q2)
    }

    pub fn f_implies_g(object: usize) -> Proposition {
        Proposition::atom(object, CategorySet::F_IMPLIES_G)
    }

    /// ψ_{from:to}; the tautology when `to < from`.
    pub fn range(allowed: CategorySet, from: usize, to: usize) -> Proposition {
        Proposition::And((from..=to).map(|b| Proposition::atom(b, allowed)).collect())
    }

    /// Conjunction of ψ over the given objects.
    pub fn each<I: IntoIterator<Item = usize>>(allowed: CategorySet, objects: I) -> Proposition {
        Proposition::And(objects.into_iter().map(|b| Proposition::atom(b, allowed)).collect())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(p: Proposition) -> Proposition {
        Proposition::Not(Box::new(p))
    }

    pub fn implies(a: Proposition, b: Proposition) -> Proposition {
        Proposition::Implies(Box::new(a), Box::new(b))
    }

    /// Flattening conjunction.
    pub fn and(self, other: Proposition) -> Proposition {
        let mut parts = match self {
            Proposition::And(v) => v,
            p => vec![p],
        };
        match other {
            Proposition::And(v) => parts.extend(v),
            p => parts.push(p),
        }
        if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Proposition::And(parts)
        }
    }

    pub fn or(self, other: Proposition) -> Proposition {
        let mut parts = match self {
            Proposition::Or(v) => v,
            p => vec![p],
        };
        match other {
            Proposition::Or(v) => parts.extend(v),
            p => parts.push(p),
        }
        Proposition::Or(parts)
    }

    pub fn is_top(&self) -> bool {
        matches!(self, Proposition::And(v) if v.is_empty())
    }

    /// Objects named by atoms (H and Exact name none).
    pub fn objects(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        self.collect_objects(&mut out);
        out
    }

    fn collect_objects(&self, out: &mut BTreeSet<usize>) {
        match self {
            Proposition::Atom { object, .. } => {
                out.insert(*object);
            }
            Proposition::Not(p) => p.collect_objects(out),
            Proposition::And(v) | Proposition::Or(v) => v.iter().for_each(|p| p.collect_objects(out)),
            Proposition::Implies(a, b) => {
                a.collect_objects(out);
                b.collect_objects(out);
            }
            Proposition::H | Proposition::Exact(_) => {}
        }
    }

    pub fn max_object(&self) -> Option<usize> {
        self.objects().last().copied()
    }

    fn validate(&self, n: usize) -> Result<(), ModelError> {
        match self {
            Proposition::Atom { object, allowed } => {
                if *object == 0 || *object > n {
                    return Err(ModelError::ObjectOutOfRange { object: *object, n });
                }
                if allowed.is_empty() {
                    return Err(ModelError::EmptyConstraint { object: *object });
                }
                Ok(())
            }
            Proposition::Not(p) => p.validate(n),
            Proposition::And(v) | Proposition::Or(v) => v.iter().try_for_each(|p| p.validate(n)),
            Proposition::Implies(a, b) => {
                a.validate(n)?;
                b.validate(n)
            }
            Proposition::H | Proposition::Exact(_) => Ok(()),
        }
    }

    /// The set of worlds of a size-`n` universe satisfying this proposition.
    pub fn event(&self, n: usize) -> Result<Event, ModelError> {
        check_universe(n)?;
        self.validate(n)?;
        Ok(self.event_unchecked(n))
    }

    fn event_unchecked(&self, n: usize) -> Event {
        match self {
            Proposition::Atom { object, allowed } => atom_event(n, *object, *allowed),
            Proposition::Not(p) => p.event_unchecked(n).complement(),
            Proposition::And(v) => {
                let mut acc = Event::full(n);
                for p in v {
                    acc.intersect_with(&p.event_unchecked(n));
                }
                acc
            }
            Proposition::Or(v) => v
                .iter()
                .fold(Event::empty(n), |acc, p| acc.union(&p.event_unchecked(n))),
            Proposition::Implies(a, b) => a.event_unchecked(n).complement().union(&b.event_unchecked(n)),
            Proposition::H => h_event(n),
            Proposition::Exact(k) => exact_event_unchecked(n, *k),
        }
    }

    /// Truth value in a single world.
    pub fn holds_in(&self, world: usize, n: usize) -> bool {
        match self {
            Proposition::Atom { object, allowed } => allowed.contains_code(category_code(world, *object)),
            Proposition::Not(p) => !p.holds_in(world, n),
            Proposition::And(v) => v.iter().all(|p| p.holds_in(world, n)),
            Proposition::Or(v) => v.iter().any(|p| p.holds_in(world, n)),
            Proposition::Implies(a, b) => !a.holds_in(world, n) || b.holds_in(world, n),
            Proposition::H => (1..=n).all(|b| category_code(world, b) != QCategory::Q2.code()),
            Proposition::Exact(k) => f_count(world, n) == *k,
        }
    }

    /// Renames every object b to `rename(b)`; H and Exact are untouched.
    pub fn map_objects(&self, rename: &impl Fn(usize) -> usize) -> Proposition {
        match self {
            Proposition::Atom { object, allowed } => Proposition::atom(rename(*object), *allowed),
            Proposition::Not(p) => Proposition::not(p.map_objects(rename)),
            Proposition::And(v) => Proposition::And(v.iter().map(|p| p.map_objects(rename)).collect()),
            Proposition::Or(v) => Proposition::Or(v.iter().map(|p| p.map_objects(rename)).collect()),
            Proposition::Implies(a, b) => Proposition::implies(a.map_objects(rename), b.map_objects(rename)),
            Proposition::H => Proposition::H,
            Proposition::Exact(k) => Proposition::Exact(*k),
        }
    }
}

fn atom_event(n: usize, object: usize, allowed: CategorySet) -> Event {
    Event::from_fn(n, |w| allowed.contains_code(category_code(w, object)))
}

fn h_event(n: usize) -> Event {
    Event::from_fn(n, |w| (1..=n).all(|b| category_code(w, b) != QCategory::Q2.code()))
}

pub(super) fn exact_event_unchecked(n: usize, k: usize) -> Event {
    Event::from_fn(n, |w| f_count(w, n) == k)
}

impl fmt::Display for Proposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::prop_lang::format(self))
    }
}
