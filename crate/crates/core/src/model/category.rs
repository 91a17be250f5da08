use std::fmt;

use serde::{Deserialize, Serialize};

/// Complete description of a single object with respect to the two
/// predicates F and G. The discriminant is the two-bit world encoding:
/// high bit F, low bit G.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum QCategory {
    /// ¬F ∧ ¬G
    Q4 = 0b00,
    /// ¬F ∧ G
    Q3 = 0b01,
    /// F ∧ ¬G, the only counterexample to F→G
    Q2 = 0b10,
    /// F ∧ G
    Q1 = 0b11,
}

impl QCategory {
    /// Q1..Q4 in their conventional order.
    pub const ALL: [QCategory; 4] = [QCategory::Q1, QCategory::Q2, QCategory::Q3, QCategory::Q4];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> QCategory {
        match code & 0b11 {
            0b00 => QCategory::Q4,
            0b01 => QCategory::Q3,
            0b10 => QCategory::Q2,
            _ => QCategory::Q1,
        }
    }

    pub fn from_predicates(f: bool, g: bool) -> QCategory {
        QCategory::from_code(((f as u8) << 1) | g as u8)
    }

    pub fn is_f(self) -> bool {
        self.code() & 0b10 != 0
    }

    pub fn is_g(self) -> bool {
        self.code() & 0b01 != 0
    }

    /// Index 0..4 in the Q1..Q4 order (Q1 → 0).
    pub fn ordinal(self) -> usize {
        3 - self.code() as usize
    }

    pub fn from_ordinal(i: usize) -> QCategory {
        QCategory::ALL[i]
    }

    /// Surface-syntax predicate name.
    pub fn name(self) -> &'static str {
        match self {
            QCategory::Q1 => "FG",
            QCategory::Q2 => "FnG",
            QCategory::Q3 => "nFG",
            QCategory::Q4 => "nFnG",
        }
    }
}

impl fmt::Display for QCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let label = match self {
            QCategory::Q1 => "Q1",
            QCategory::Q2 => "Q2",
            QCategory::Q3 => "Q3",
            QCategory::Q4 => "Q4",
        };
        f.write_str(label)
    }
}

/// A set of Q-categories, bit `c` set iff the category with code `c` is a
/// member.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CategorySet(u8);

impl CategorySet {
    pub const EMPTY: CategorySet = CategorySet(0);
    pub const FULL: CategorySet = CategorySet(0b1111);
    pub const F: CategorySet = CategorySet(0b1100);
    pub const NOT_F: CategorySet = CategorySet(0b0011);
    pub const G: CategorySet = CategorySet(0b1010);
    pub const NOT_G: CategorySet = CategorySet(0b0101);
    pub const F_IMPLIES_G: CategorySet = CategorySet(0b1011);

    /// The twelve per-object constraints that background knowledge may use:
    /// F, ¬F, G, ¬G, F̄Ḡ, ¬F̄Ḡ, F̄G, ¬F̄G, FḠ, F→G, FG, ¬FG.
    pub const DELTA_CONSTRAINTS: [CategorySet; 12] = [
        CategorySet::F,
        CategorySet::NOT_F,
        CategorySet::G,
        CategorySet::NOT_G,
        CategorySet::single(QCategory::Q4),
        CategorySet::single(QCategory::Q4).complement(),
        CategorySet::single(QCategory::Q3),
        CategorySet::single(QCategory::Q3).complement(),
        CategorySet::single(QCategory::Q2),
        CategorySet::F_IMPLIES_G,
        CategorySet::single(QCategory::Q1),
        CategorySet::single(QCategory::Q1).complement(),
    ];

    /// Complete descriptions that do not falsify F→G.
    pub const SMALL_DELTA_CONSTRAINTS: [CategorySet; 3] = [
        CategorySet::single(QCategory::Q1),
        CategorySet::single(QCategory::Q3),
        CategorySet::single(QCategory::Q4),
    ];

    pub const fn from_bits(bits: u8) -> CategorySet {
        CategorySet(bits & 0b1111)
    }

    pub const fn bits(self) -> u8 {
        self.0
    }

    pub const fn single(q: QCategory) -> CategorySet {
        CategorySet(1 << (q as u8))
    }

    pub fn of(cats: &[QCategory]) -> CategorySet {
        cats.iter().fold(CategorySet::EMPTY, |acc, &q| acc.union(CategorySet::single(q)))
    }

    pub const fn complement(self) -> CategorySet {
        CategorySet(!self.0 & 0b1111)
    }

    pub const fn union(self, other: CategorySet) -> CategorySet {
        CategorySet(self.0 | other.0)
    }

    pub const fn intersection(self, other: CategorySet) -> CategorySet {
        CategorySet(self.0 & other.0)
    }

    pub const fn contains_code(self, code: u8) -> bool {
        self.0 & (1 << code) != 0
    }

    pub fn contains(self, q: QCategory) -> bool {
        self.contains_code(q.code())
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_full(self) -> bool {
        self.0 == 0b1111
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn singleton(self) -> Option<QCategory> {
        (self.len() == 1).then(|| QCategory::from_code(self.0.trailing_zeros() as u8))
    }

    /// Members in Q1..Q4 order.
    pub fn members(self) -> impl Iterator<Item = QCategory> {
        QCategory::ALL.into_iter().filter(move |q| self.contains(*q))
    }

    /// True for the twelve subsets a background constraint may use.
    /// {Q1,Q4} and {Q2,Q3} are not expressible.
    pub fn is_delta_expressible(self) -> bool {
        !self.is_empty() && !self.is_full() && self != CategorySet::of(&[QCategory::Q1, QCategory::Q4])
            && self != CategorySet::of(&[QCategory::Q2, QCategory::Q3])
    }

    /// Surface-syntax name if one of the nine named predicates matches.
    pub fn predicate_name(self) -> Option<&'static str> {
        PREDICATE_NAMES
            .iter()
            .find(|(_, set)| *set == self)
            .map(|(name, _)| *name)
    }
}

/// The nine named predicates of the proposition language.
pub const PREDICATE_NAMES: [(&str, CategorySet); 9] = [
    ("F", CategorySet::F),
    ("G", CategorySet::G),
    ("FG", CategorySet::single(QCategory::Q1)),
    ("FnG", CategorySet::single(QCategory::Q2)),
    ("nFG", CategorySet::single(QCategory::Q3)),
    ("nFnG", CategorySet::single(QCategory::Q4)),
    ("F>G", CategorySet::F_IMPLIES_G),
    ("nF", CategorySet::NOT_F),
    ("nG", CategorySet::NOT_G),
];

impl fmt::Display for CategorySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, q) in self.members().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{q}")?;
        }
        f.write_str("}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q2_is_the_only_counterexample() {
        let falsifiers: Vec<_> = QCategory::ALL
            .into_iter()
            .filter(|q| !CategorySet::F_IMPLIES_G.contains(*q))
            .collect();
        assert_eq!(falsifiers, vec![QCategory::Q2]);
    }

    #[test]
    fn codes_match_predicates() {
        assert_eq!(QCategory::Q1.code(), 0b11);
        assert_eq!(QCategory::Q2.code(), 0b10);
        assert_eq!(QCategory::Q3.code(), 0b01);
        assert_eq!(QCategory::Q4.code(), 0b00);
        for q in QCategory::ALL {
            assert_eq!(QCategory::from_predicates(q.is_f(), q.is_g()), q);
            assert_eq!(QCategory::from_ordinal(q.ordinal()), q);
        }
    }

    #[test]
    fn twelve_expressible_constraints() {
        let expressible: Vec<_> = (0..16u8)
            .map(CategorySet::from_bits)
            .filter(|s| s.is_delta_expressible())
            .collect();
        assert_eq!(expressible.len(), 12);
        for c in CategorySet::DELTA_CONSTRAINTS {
            assert!(expressible.contains(&c));
        }
        let mut sorted = CategorySet::DELTA_CONSTRAINTS.to_vec();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 12);
    }

    #[test]
    fn named_predicates() {
        assert_eq!(CategorySet::single(QCategory::Q2).predicate_name(), Some("FnG"));
        assert_eq!(CategorySet::of(&[QCategory::Q1, QCategory::Q3, QCategory::Q4]).predicate_name(), Some("F>G"));
        assert_eq!(CategorySet::FULL.predicate_name(), None);
    }
}
