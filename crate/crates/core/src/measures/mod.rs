//! Exact probability measures over the worlds of a finite universe.
//!
//! A [`Measure`] stores one non-negative integer numerator per world over a
//! shared denominator (the least common denominator of the weights), so every
//! event probability is an integer sum followed by a single reduction.

mod constructors;
mod file;
mod spec;

pub use constructors::{
    carnap_chain_weight, carnap_measure, iid_product_measure, maher_displayed_predictive,
    maher_independent_measure, maher_joint_measure, maher_measure, maher_predictive_report,
    random_exchangeable_measure, random_measure, uniform_measure, MaherDiscrepancy, MaherParams,
};
pub use file::{measure_from_file, measure_from_json, MeasureFile};
pub use spec::{parse_measure_spec, MeasureSpec};

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{category_code, check_universe, world_count, Event, ModelError, QCategory};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MeasureError {
    #[error("weights sum to {0}, not 1")]
    SumNotOne(String),
    #[error("weight of world {index} is negative ({value})")]
    NegativeWeight { index: usize, value: String },
    #[error("expected {expected} weights, found {found}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("conditioning event has probability zero")]
    UndefinedConditional,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("cannot read measure: {0}")]
    Io(String),
    #[error("malformed measure file: {0}")]
    Format(String),
    #[error("bad measure spec {spec:?}: {reason}")]
    Spec { spec: String, reason: String },
}

impl MeasureError {
    /// Stable machine-readable error code.
    pub fn code(&self) -> &'static str {
        match self {
            MeasureError::SumNotOne(_) => "SUM_NOT_ONE",
            MeasureError::NegativeWeight { .. } => "NEGATIVE_WEIGHT",
            MeasureError::SizeMismatch { .. } => "SIZE_MISMATCH",
            MeasureError::InvalidParameter(_) => "INVALID_PARAMETER",
            MeasureError::UndefinedConditional => "UNDEFINED_CONDITIONAL",
            MeasureError::Model(_) => "MODEL",
            MeasureError::Io(_) => "IO",
            MeasureError::Format(_) => "FORMAT",
            MeasureError::Spec { .. } => "SPEC",
        }
    }
}

/// Prior over the four Q-categories, stored in Q1..Q4 order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CategoryPrior {
    #[serde(
        serialize_with = "serialize_four",
        deserialize_with = "deserialize_four"
    )]
    values: [Rational; 4],
}

fn serialize_four<S: serde::Serializer>(v: &[Rational; 4], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(4))?;
    for r in v {
        seq.serialize_element(&rational::to_fraction_string(r))?;
    }
    seq.end()
}

fn deserialize_four<'de, D: serde::Deserializer<'de>>(d: D) -> Result<[Rational; 4], D::Error> {
    let v = Vec::<String>::deserialize(d)?;
    if v.len() != 4 {
        return Err(serde::de::Error::custom("expected four rationals"));
    }
    let parsed: Result<Vec<Rational>, _> = v.iter().map(|s| rational::parse_rational(s)).collect();
    let parsed = parsed.map_err(serde::de::Error::custom)?;
    Ok([parsed[0].clone(), parsed[1].clone(), parsed[2].clone(), parsed[3].clone()])
}

impl CategoryPrior {
    /// Values for Q1, Q2, Q3, Q4.
    pub fn new(values: [Rational; 4]) -> Result<CategoryPrior, MeasureError> {
        if values.iter().any(|v| v.is_negative()) {
            return Err(MeasureError::InvalidParameter("category prior has a negative entry".into()));
        }
        let sum: Rational = values.iter().sum();
        if !sum.is_one() {
            return Err(MeasureError::InvalidParameter(format!(
                "category prior sums to {}",
                rational::to_fraction_string(&sum)
            )));
        }
        Ok(CategoryPrior { values })
    }

    pub fn uniform() -> CategoryPrior {
        let quarter = rational::ratio(1, 4);
        CategoryPrior {
            values: [quarter.clone(), quarter.clone(), quarter.clone(), quarter],
        }
    }

    /// Joint prior of independent F and G with the given marginals.
    pub fn product(pf: &Rational, pg: &Rational) -> CategoryPrior {
        let one = Rational::one();
        CategoryPrior {
            values: [
                pf * pg,
                pf * (&one - pg),
                (&one - pf) * pg,
                (&one - pf) * (&one - pg),
            ],
        }
    }

    pub fn get(&self, q: QCategory) -> &Rational {
        &self.values[q.ordinal()]
    }

    pub fn values(&self) -> &[Rational; 4] {
        &self.values
    }

    pub fn is_positive(&self) -> bool {
        self.values.iter().all(|v| v.is_positive())
    }
}

impl fmt::Display for CategoryPrior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.values.iter().map(rational::to_fraction_string).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// Category counts over a set of described objects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct CountVector {
    /// Counts in Q1..Q4 order.
    pub counts: [usize; 4],
}

impl CountVector {
    pub fn from_categories<I: IntoIterator<Item = QCategory>>(cats: I) -> CountVector {
        let mut counts = [0; 4];
        for q in cats {
            counts[q.ordinal()] += 1;
        }
        CountVector { counts }
    }

    pub fn n(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn of(&self, q: QCategory) -> usize {
        self.counts[q.ordinal()]
    }

    pub fn n_f(&self) -> usize {
        self.of(QCategory::Q1) + self.of(QCategory::Q2)
    }

    pub fn n_g(&self) -> usize {
        self.of(QCategory::Q1) + self.of(QCategory::Q3)
    }

    pub fn n_not_g(&self) -> usize {
        self.of(QCategory::Q2) + self.of(QCategory::Q4)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Provenance {
    Uniform,
    Iid {
        theta: CategoryPrior,
    },
    Carnap {
        #[serde(serialize_with = "rational::serialize_rational", deserialize_with = "rational::deserialize_rational")]
        lambda: Rational,
        gamma: CategoryPrior,
    },
    Maher(MaherParams),
    Custom,
    RandomExch {
        seed: u64,
    },
    Random {
        seed: u64,
    },
    /// Predicate roles swapped: F′ := ¬G, G′ := ¬F.
    RoleSwapped(Box<Provenance>),
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = rational::to_fraction_string;
        match self {
            Provenance::Uniform => f.write_str("uniform"),
            Provenance::Iid { theta } => write!(f, "iid(theta={theta})"),
            Provenance::Carnap { lambda, gamma } => write!(f, "carnap(lambda={}, gamma={gamma})", r(lambda)),
            Provenance::Maher(p) => write!(
                f,
                "maher(lambda={}, prI={}, pF={}, pG={})",
                r(&p.lambda),
                r(&p.pr_i),
                r(&p.pf),
                r(&p.pg)
            ),
            Provenance::Custom => f.write_str("custom"),
            Provenance::RandomExch { seed } => write!(f, "random-exchangeable(seed={seed})"),
            Provenance::Random { seed } => write!(f, "random(seed={seed})"),
            Provenance::RoleSwapped(inner) => write!(f, "role-swapped({inner})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Numerators {
    /// Used whenever the denominator fits in a u128, so no partial sum can
    /// overflow.
    Small(Vec<u128>),
    Big(Vec<BigUint>),
}

#[derive(Debug, Clone)]
pub struct Measure {
    n: usize,
    numerators: Numerators,
    denominator: BigUint,
    provenance: Provenance,
}

impl PartialEq for Measure {
    /// Weight equality; provenance is ignored. The least common denominator
    /// makes the representation canonical.
    fn eq(&self, other: &Measure) -> bool {
        self.n == other.n && self.denominator == other.denominator && self.numerators == other.numerators
    }
}

impl Measure {
    /// Builds a measure from explicit weights in world-encoding order.
    pub fn from_weights(
        n: usize,
        weights: &[Rational],
        provenance: Provenance,
    ) -> Result<Measure, MeasureError> {
        check_universe(n)?;
        let expected = world_count(n);
        if weights.len() != expected {
            return Err(MeasureError::SizeMismatch {
                expected,
                found: weights.len(),
            });
        }
        if let Some((index, w)) = weights.iter().enumerate().find(|(_, w)| w.is_negative()) {
            return Err(MeasureError::NegativeWeight {
                index,
                value: rational::to_fraction_string(w),
            });
        }
        let sum: Rational = weights.iter().sum();
        if !sum.is_one() {
            return Err(MeasureError::SumNotOne(rational::to_fraction_string(&sum)));
        }
        let lcd = weights
            .iter()
            .fold(BigInt::one(), |acc, w| acc.lcm(w.denom()));
        let nums = weights.iter().map(|w| (w.numer() * (&lcd / w.denom())).to_biguint().unwrap());
        Ok(Measure::assemble(n, nums, lcd.to_biguint().unwrap(), provenance))
    }

    /// Builds a measure whose weight depends only on each world's category
    /// counts. `orbit_weight` receives counts indexed by category code and
    /// returns the weight of a single world with those counts.
    pub(crate) fn from_orbit_weights(
        n: usize,
        mut orbit_weight: impl FnMut(&[u8; 4]) -> Rational,
        provenance: Provenance,
    ) -> Result<Measure, MeasureError> {
        check_universe(n)?;
        let side = n + 1;
        let key = |c: &[u8; 4]| c[0] as usize + side * (c[1] as usize + side * c[2] as usize);
        let mut table: Vec<Option<Rational>> = vec![None; side * side * side];
        let mut total = Rational::zero();
        for c in count_vectors(n) {
            let w = orbit_weight(&c);
            if w.is_negative() {
                return Err(MeasureError::InvalidParameter("negative orbit weight".into()));
            }
            total += &w * Rational::from_integer(multinomial(&c));
            table[key(&c)] = Some(w);
        }
        if !total.is_one() {
            return Err(MeasureError::SumNotOne(rational::to_fraction_string(&total)));
        }
        let lcd = table
            .iter()
            .flatten()
            .fold(BigInt::one(), |acc, w| acc.lcm(w.denom()));
        let orbit_nums: Vec<Option<BigUint>> = table
            .iter()
            .map(|w| w.as_ref().map(|w| (w.numer() * (&lcd / w.denom())).to_biguint().unwrap()))
            .collect();
        let world_orbit = |w: usize| {
            let c = crate::model::code_counts(w, n);
            orbit_nums[key(&c)].as_ref().expect("orbit weight present")
        };
        let denominator = lcd.to_biguint().unwrap();
        let numerators = match denominator.to_u128() {
            Some(_) => {
                let small: Vec<Option<u128>> =
                    orbit_nums.iter().map(|o| o.as_ref().map(|v| v.to_u128().unwrap())).collect();
                Numerators::Small(
                    (0..world_count(n))
                        .map(|w| small[key(&crate::model::code_counts(w, n))].unwrap())
                        .collect(),
                )
            }
            None => Numerators::Big((0..world_count(n)).map(|w| world_orbit(w).clone()).collect()),
        };
        Ok(Measure {
            n,
            numerators,
            denominator,
            provenance,
        })
    }

    fn assemble(
        n: usize,
        nums: impl Iterator<Item = BigUint>,
        denominator: BigUint,
        provenance: Provenance,
    ) -> Measure {
        let numerators = if denominator.to_u128().is_some() {
            Numerators::Small(nums.map(|v| v.to_u128().unwrap()).collect())
        } else {
            Numerators::Big(nums.collect())
        };
        Measure {
            n,
            numerators,
            denominator,
            provenance,
        }
    }

    pub fn universe_size(&self) -> usize {
        self.n
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Measure {
        self.provenance = provenance;
        self
    }

    pub fn denominator(&self) -> &BigUint {
        &self.denominator
    }

    pub fn numerator(&self, world: usize) -> BigUint {
        match &self.numerators {
            Numerators::Small(v) => BigUint::from(v[world]),
            Numerators::Big(v) => v[world].clone(),
        }
    }

    pub fn weight(&self, world: usize) -> Rational {
        Rational::new(self.numerator(world).into(), self.denominator.clone().into())
    }

    pub fn weights(&self) -> Vec<Rational> {
        (0..world_count(self.n)).map(|w| self.weight(w)).collect()
    }

    fn check_event(&self, event: &Event) -> Result<(), MeasureError> {
        if event.universe_size() != self.n {
            return Err(MeasureError::SizeMismatch {
                expected: self.n,
                found: event.universe_size(),
            });
        }
        Ok(())
    }

    /// Unnormalized mass of an event (numerator over [`Self::denominator`]).
    pub fn mass(&self, event: &Event) -> BigUint {
        assert_eq!(event.universe_size(), self.n, "event over a different universe");
        match &self.numerators {
            Numerators::Small(v) => {
                let total: u128 = event.iter().map(|w| v[w]).sum();
                BigUint::from(total)
            }
            Numerators::Big(v) => event.iter().map(|w| &v[w]).sum(),
        }
    }

    pub fn probability(&self, event: &Event) -> Result<Rational, MeasureError> {
        self.check_event(event)?;
        Ok(Rational::new(self.mass(event).into(), self.denominator.clone().into()))
    }

    /// pr(A | B) = pr(A ∩ B) / pr(B).
    pub fn conditional(&self, a: &Event, b: &Event) -> Result<Rational, MeasureError> {
        self.check_event(a)?;
        self.check_event(b)?;
        let mb = self.mass(b);
        if mb.is_zero() {
            return Err(MeasureError::UndefinedConditional);
        }
        let mab = self.mass(&a.intersection(b));
        Ok(Rational::new(mab.into(), mb.into()))
    }

    pub fn is_regular(&self) -> bool {
        match &self.numerators {
            Numerators::Small(v) => v.iter().all(|x| *x > 0),
            Numerators::Big(v) => v.iter().all(|x| !x.is_zero()),
        }
    }

    fn same_numerator(&self, a: usize, b: usize) -> bool {
        match &self.numerators {
            Numerators::Small(v) => v[a] == v[b],
            Numerators::Big(v) => v[a] == v[b],
        }
    }

    /// Invariance under every adjacent transposition of objects, which
    /// generate the full permutation group.
    pub fn is_exchangeable(&self) -> bool {
        (1..self.n).all(|i| {
            let shift = 2 * (i - 1);
            (0..world_count(self.n)).all(|w| {
                let lo = (w >> shift) & 0b11;
                let hi = (w >> (shift + 2)) & 0b11;
                let swapped = (w & !(0b1111 << shift)) | (hi << shift) | (lo << (shift + 2));
                self.same_numerator(w, swapped)
            })
        })
    }

    /// Applies a per-object category relabeling: the weight of world `w`
    /// moves to the world obtained by mapping every object's category
    /// through `map` (indexed by category code).
    pub fn relabel(&self, map: [QCategory; 4], provenance: Provenance) -> Measure {
        let image = |w: usize| {
            (1..=self.n).fold(0usize, |acc, b| {
                acc | ((map[category_code(w, b) as usize].code() as usize) << (2 * (b - 1)))
            })
        };
        let count = world_count(self.n);
        let numerators = match &self.numerators {
            Numerators::Small(v) => {
                let mut out = vec![0u128; count];
                for (w, x) in v.iter().enumerate() {
                    out[image(w)] = *x;
                }
                Numerators::Small(out)
            }
            Numerators::Big(v) => {
                let mut out = vec![BigUint::zero(); count];
                for (w, x) in v.iter().enumerate() {
                    out[image(w)] = x.clone();
                }
                Numerators::Big(out)
            }
        };
        Measure {
            n: self.n,
            numerators,
            denominator: self.denominator.clone(),
            provenance,
        }
    }
}

/// Category-count vectors (indexed by code) summing to `n`, in
/// lexicographic order.
pub(crate) fn count_vectors(n: usize) -> Vec<[u8; 4]> {
    let mut out = Vec::new();
    for a in 0..=n {
        for b in 0..=n - a {
            for c in 0..=n - a - b {
                out.push([a as u8, b as u8, c as u8, (n - a - b - c) as u8]);
            }
        }
    }
    out
}

/// Number of worlds sharing the given category counts.
pub(crate) fn multinomial(counts: &[u8; 4]) -> BigInt {
    let fact = |k: u8| (1..=k as u64).fold(BigInt::one(), |acc, i| acc * i);
    let n: u8 = counts.iter().sum();
    counts.iter().fold(fact(n), |acc, &c| acc / fact(c))
}

/// Convenience: probability of a proposition.
pub fn probability_of(m: &Measure, prop: &crate::model::Proposition) -> Result<Rational, MeasureError> {
    m.probability(&prop.event(m.universe_size())?)
}

/// pr(A | B) for events over the measure's universe.
pub fn conditional(m: &Measure, a: &Event, b: &Event) -> Result<Rational, MeasureError> {
    m.conditional(a, b)
}

pub fn is_exchangeable(m: &Measure) -> bool {
    m.is_exchangeable()
}

pub fn is_regular(m: &Measure) -> bool {
    m.is_regular()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Proposition;
    use crate::rational::ratio;

    #[test]
    fn orbit_sizes_cover_all_worlds() {
        for n in 1..=6 {
            let total: BigInt = count_vectors(n).iter().map(multinomial).sum();
            assert_eq!(total, BigInt::from(world_count(n)));
        }
    }

    #[test]
    fn from_weights_validates() {
        let quarter = vec![ratio(1, 4); 4];
        assert!(Measure::from_weights(1, &quarter, Provenance::Custom).is_ok());
        let short = vec![ratio(1, 3); 3];
        assert_eq!(
            Measure::from_weights(1, &short, Provenance::Custom).unwrap_err().code(),
            "SIZE_MISMATCH"
        );
        let off = vec![ratio(1, 4), ratio(1, 4), ratio(1, 4), ratio(24, 100)];
        assert_eq!(
            Measure::from_weights(1, &off, Provenance::Custom).unwrap_err().code(),
            "SUM_NOT_ONE"
        );
        let neg = vec![ratio(-1, 4), ratio(1, 2), ratio(1, 2), ratio(1, 4)];
        assert_eq!(
            Measure::from_weights(1, &neg, Provenance::Custom).unwrap_err().code(),
            "NEGATIVE_WEIGHT"
        );
    }

    #[test]
    fn conditional_basics() {
        let m = uniform_measure(2).unwrap();
        let h = Proposition::H.event(2).unwrap();
        let fg1 = Proposition::fg(1).event(2).unwrap();
        assert_eq!(m.conditional(&h, &fg1).unwrap(), ratio(3, 4));
        assert_eq!(m.conditional(&fg1, &fg1).unwrap(), ratio(1, 1));
        assert_eq!(m.conditional(&Event::empty(2), &fg1).unwrap(), ratio(0, 1));
        assert_eq!(m.conditional(&h, &Event::full(2)).unwrap(), m.probability(&h).unwrap());
        assert_eq!(
            m.conditional(&h, &Event::empty(2)).unwrap_err(),
            MeasureError::UndefinedConditional
        );
    }

    #[test]
    fn non_exchangeable_is_detected() {
        // Extra weight on object 1 being F.
        let weights: Vec<Rational> = (0..16)
            .map(|w| if w & 0b10 != 0 { ratio(3, 32) } else { ratio(1, 32) })
            .collect();
        let m = Measure::from_weights(2, &weights, Provenance::Custom).unwrap();
        assert!(!m.is_exchangeable());
        assert!(m.is_regular());
    }

    #[test]
    fn big_denominators_use_big_storage() {
        let tiny = Rational::new(BigInt::one(), BigInt::from(2u8).pow(130));
        let mut weights = vec![Rational::zero(); 4];
        weights[0] = tiny.clone();
        weights[1] = Rational::one() - tiny;
        let m = Measure::from_weights(1, &weights, Provenance::Custom).unwrap();
        assert!(matches!(m.numerators, Numerators::Big(_)));
        assert!(!m.is_regular());
        let e = Event::from_fn(1, |w| w == 0);
        assert_eq!(m.probability(&e).unwrap(), weights[0]);
    }
}
