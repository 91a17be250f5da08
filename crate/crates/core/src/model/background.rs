//! Background knowledge that factors into independent per-object
//! constraints (the Δ family) and its complete-description subfamily δ.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::world::category_code;
use super::{check_universe, CategorySet, Event, ModelError, Proposition, QCategory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DeltaKind {
    NotInDelta,
    InDelta,
    InSmallDelta,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeltaClass {
    pub kind: DeltaKind,
    /// Per-object constraint for every described object (members only).
    pub constraints: BTreeMap<usize, CategorySet>,
    pub diagnostic: Option<String>,
}

impl DeltaClass {
    pub fn is_delta(&self) -> bool {
        self.kind != DeltaKind::NotInDelta
    }

    pub fn is_small_delta(&self) -> bool {
        self.kind == DeltaKind::InSmallDelta
    }

    pub fn inds(&self) -> BTreeSet<usize> {
        self.constraints.keys().copied().collect()
    }

    pub fn background(&self) -> Option<Background> {
        self.is_delta().then(|| Background {
            constraints: self.constraints.iter().map(|(&b, &s)| (b, s)).collect(),
        })
    }

    fn rejected(reason: String) -> DeltaClass {
        DeltaClass {
            kind: DeltaKind::NotInDelta,
            constraints: BTreeMap::new(),
            diagnostic: Some(reason),
        }
    }
}

/// Decides membership semantically: the event must equal the product of its
/// per-object projections and every non-trivial projection must be one of
/// the twelve expressible constraints.
pub fn classify_background(prop: &Proposition, n: usize) -> Result<DeltaClass, ModelError> {
    let event = prop.event(n)?;
    if event.is_empty() {
        return Ok(DeltaClass::rejected("inconsistent proposition".into()));
    }
    let mut projections = vec![0u8; n + 1];
    for w in event.iter() {
        for (b, proj) in projections.iter_mut().enumerate().skip(1) {
            *proj |= 1 << category_code(w, b);
        }
    }
    let product: usize = projections[1..].iter().map(|p| p.count_ones() as usize).product();
    if product != event.len() {
        return Ok(DeltaClass::rejected(
            "not a conjunction of independent per-object constraints".into(),
        ));
    }
    let mut constraints = BTreeMap::new();
    for (b, &bits) in projections.iter().enumerate().skip(1) {
        let set = CategorySet::from_bits(bits);
        if set.is_full() {
            continue;
        }
        if !set.is_delta_expressible() {
            return Ok(DeltaClass::rejected(format!(
                "constraint {set} on object {b} is not expressible"
            )));
        }
        constraints.insert(b, set);
    }
    let small = constraints
        .values()
        .all(|s| s.singleton().is_some_and(|q| q != QCategory::Q2));
    Ok(DeltaClass {
        kind: if small { DeltaKind::InSmallDelta } else { DeltaKind::InDelta },
        constraints,
        diagnostic: None,
    })
}

/// A canonical member of Δ: sorted, distinct objects each with one
/// expressible constraint.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Background {
    constraints: Vec<(usize, CategorySet)>,
}

impl Background {
    pub fn top() -> Background {
        Background::default()
    }

    pub fn from_constraints<I: IntoIterator<Item = (usize, CategorySet)>>(items: I) -> Background {
        let map: BTreeMap<usize, CategorySet> = items.into_iter().collect();
        Background {
            constraints: map.into_iter().collect(),
        }
    }

    pub fn constraints(&self) -> &[(usize, CategorySet)] {
        &self.constraints
    }

    pub fn constraint(&self, object: usize) -> Option<CategorySet> {
        self.constraints
            .iter()
            .find(|(b, _)| *b == object)
            .map(|(_, s)| *s)
    }

    pub fn inds(&self) -> BTreeSet<usize> {
        self.constraints.iter().map(|(b, _)| *b).collect()
    }

    pub fn mentions(&self, object: usize) -> bool {
        self.constraints.iter().any(|(b, _)| *b == object)
    }

    /// Adds (or tightens) the constraint on one object.
    pub fn with(&self, object: usize, set: CategorySet) -> Background {
        let mut map: BTreeMap<usize, CategorySet> = self.constraints.iter().copied().collect();
        map.entry(object)
            .and_modify(|s| *s = s.intersection(set))
            .or_insert(set);
        Background {
            constraints: map.into_iter().collect(),
        }
    }

    pub fn is_small_delta(&self) -> bool {
        self.constraints
            .iter()
            .all(|(_, s)| s.singleton().is_some_and(|q| q != QCategory::Q2))
    }

    pub fn to_proposition(&self) -> Proposition {
        Proposition::And(
            self.constraints
                .iter()
                .map(|&(b, s)| Proposition::atom(b, s))
                .collect(),
        )
    }

    pub fn event(&self, n: usize) -> Result<Event, ModelError> {
        check_universe(n)?;
        if let Some(&(b, _)) = self.constraints.iter().find(|(b, _)| *b == 0 || *b > n) {
            return Err(ModelError::ObjectOutOfRange { object: b, n });
        }
        let cs = &self.constraints;
        Ok(Event::from_fn(n, |w| {
            cs.iter().all(|&(b, s)| s.contains_code(category_code(w, b)))
        }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BackgroundFamily {
    Delta,
    SmallDelta,
}

impl BackgroundFamily {
    pub fn options(self) -> &'static [CategorySet] {
        match self {
            BackgroundFamily::Delta => &CategorySet::DELTA_CONSTRAINTS,
            BackgroundFamily::SmallDelta => &CategorySet::SMALL_DELTA_CONSTRAINTS,
        }
    }
}

/// Lazily walks the canonical members whose described objects avoid
/// `excluded`. The first member is ⊤; the highest free object varies
/// fastest.
pub fn backgrounds(
    n: usize,
    excluded: &[usize],
    family: BackgroundFamily,
) -> impl Iterator<Item = Background> {
    let free: Vec<usize> = (1..=n).filter(|b| !excluded.contains(b)).collect();
    let options = family.options();
    let radix = options.len() + 1;
    let total = radix.checked_pow(free.len() as u32).unwrap_or(usize::MAX);
    (0..total).map(move |mut code| {
        let mut constraints = Vec::new();
        let mut digits = vec![0usize; free.len()];
        for d in digits.iter_mut().rev() {
            *d = code % radix;
            code /= radix;
        }
        for (&b, &d) in free.iter().zip(&digits) {
            if d > 0 {
                constraints.push((b, options[d - 1]));
            }
        }
        Background { constraints }
    })
}

pub fn background_count(n: usize, excluded: &[usize], family: BackgroundFamily) -> usize {
    let free = (1..=n).filter(|b| !excluded.contains(b)).count();
    (family.options().len() + 1).pow(free as u32)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BackgroundEnumeration {
    pub members: Vec<Proposition>,
    pub truncated: bool,
}

pub fn enumerate_backgrounds(
    n: usize,
    excluded: &[usize],
    family: BackgroundFamily,
    max_count: Option<usize>,
) -> Result<BackgroundEnumeration, ModelError> {
    check_universe(n)?;
    if let Some(&b) = excluded.iter().find(|&&b| b == 0 || b > n) {
        return Err(ModelError::ObjectOutOfRange { object: b, n });
    }
    let limit = max_count.unwrap_or(usize::MAX);
    let total = background_count(n, excluded, family);
    let members = backgrounds(n, excluded, family)
        .take(limit)
        .map(|b| b.to_proposition())
        .collect();
    Ok(BackgroundEnumeration {
        members,
        truncated: total > limit,
    })
}
