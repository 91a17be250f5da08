//! Unknown universe size: a mixture over the sample spaces Ω_α … Ω_β.
//!
//! Objects are shared across sizes through nested universes
//! U_υ = U_{υ−1} ⊔ {υ}, so a proposition over {1..α} has a correspondent in
//! every Ω_υ. A generalized event is stored as one event per size.

use std::collections::BTreeMap;
use std::path::Path;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::measures::{
    iid_product_measure, measure_from_json, parse_measure_spec, random_exchangeable_measure, CategoryPrior, Measure,
    MeasureError,
};
use crate::model::{Event, ModelError, Proposition};
use crate::rational::{self, parse_rational, Rational};
use crate::rules::{exact_and_approx, Conclusion, GuardedResult};

/// Largest β accepted by [`MixtureModel::new`].
pub const BETA_CAP: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CosmologyError {
    #[error("invalid mixture: {0}")]
    Invalid(String),
    #[error("proposition mentions object {object}, beyond alpha = {alpha}")]
    ObjectBeyondAlpha { object: usize, alpha: usize },
    #[error("evidence has probability zero")]
    ZeroEvidence,
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("cannot read mixture: {0}")]
    Io(String),
    #[error("malformed mixture file: {0}")]
    Format(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureModel {
    alpha: usize,
    beta: usize,
    q: BTreeMap<usize, Rational>,
    components: BTreeMap<usize, Measure>,
}

impl MixtureModel {
    pub fn new(
        alpha: usize,
        beta: usize,
        q: BTreeMap<usize, Rational>,
        components: BTreeMap<usize, Measure>,
    ) -> Result<MixtureModel, CosmologyError> {
        if alpha == 0 || alpha > beta {
            return Err(CosmologyError::Invalid(format!("need 1 <= alpha <= beta, got {alpha}, {beta}")));
        }
        if beta > BETA_CAP {
            return Err(CosmologyError::Invalid(format!("beta is limited to {BETA_CAP}")));
        }
        let sizes: Vec<usize> = (alpha..=beta).collect();
        if !q.keys().copied().eq(sizes.iter().copied()) || !components.keys().copied().eq(sizes.iter().copied()) {
            return Err(CosmologyError::Invalid(format!(
                "q and components must have exactly the sizes {alpha}..={beta}"
            )));
        }
        let mut total = Rational::zero();
        for (size, w) in &q {
            if !rational::is_probability(w) {
                return Err(CosmologyError::Invalid(format!("q[{size}] = {w} is not in [0, 1]")));
            }
            total += w;
        }
        if !total.is_one() {
            return Err(CosmologyError::Invalid(format!("q sums to {total}, not 1")));
        }
        for (size, m) in &components {
            if m.universe_size() != *size {
                return Err(CosmologyError::Invalid(format!(
                    "component for size {size} has universe size {}",
                    m.universe_size()
                )));
            }
        }
        Ok(MixtureModel { alpha, beta, q, components })
    }

    /// Builds every component with `build`.
    pub fn from_family(
        alpha: usize,
        beta: usize,
        q: BTreeMap<usize, Rational>,
        build: impl Fn(usize) -> Result<Measure, MeasureError>,
    ) -> Result<MixtureModel, CosmologyError> {
        let components = (alpha..=beta)
            .map(|size| Ok((size, build(size)?)))
            .collect::<Result<BTreeMap<_, _>, MeasureError>>()?;
        MixtureModel::new(alpha, beta, q, components)
    }

    pub fn alpha(&self) -> usize {
        self.alpha
    }

    pub fn beta(&self) -> usize {
        self.beta
    }

    pub fn q(&self) -> &BTreeMap<usize, Rational> {
        &self.q
    }

    pub fn component(&self, size: usize) -> Option<&Measure> {
        self.components.get(&size)
    }

    /// Sizes with positive prior weight.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.q.iter().filter(|(_, w)| !w.is_zero()).map(|(s, _)| *s)
    }

    /// ω_ρ: the correspondent of ρ in every Ω_υ.
    pub fn generalized_event(&self, rho: &Proposition) -> Result<GeneralizedEvent, CosmologyError> {
        if let Some(object) = rho.max_object().filter(|&o| o > self.alpha) {
            return Err(CosmologyError::ObjectBeyondAlpha { object, alpha: self.alpha });
        }
        let events = (self.alpha..=self.beta)
            .into_par_iter()
            .map(|size| Ok((size, rho.event(size)?)))
            .collect::<Result<Vec<_>, ModelError>>()?;
        Ok(GeneralizedEvent { events: events.into_iter().collect() })
    }

    /// P̃(ω) = Σ_υ q_υ · P_υ(ω ∩ Ω_υ).
    pub fn probability(&self, omega: &GeneralizedEvent) -> Rational {
        omega
            .events
            .iter()
            .filter(|(size, _)| !self.q[size].is_zero())
            .map(|(size, e)| &self.q[size] * self.component_probability(*size, e))
            .fold(Rational::zero(), |acc, x| acc + x)
    }

    /// P̃(ω | Ω_υ); `None` when q_υ = 0.
    pub fn probability_given_size(&self, omega: &GeneralizedEvent, size: usize) -> Option<Rational> {
        let w = self.q.get(&size)?;
        if w.is_zero() {
            return None;
        }
        Some(self.probability(&omega.restrict(size)) / w)
    }

    fn component_probability(&self, size: usize, e: &Event) -> Rational {
        let m = &self.components[&size];
        Rational::new(m.mass(e).into(), m.denominator().clone().into())
    }
}

/// One event per universe size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneralizedEvent {
    events: BTreeMap<usize, Event>,
}

impl GeneralizedEvent {
    pub fn slice(&self, size: usize) -> Option<&Event> {
        self.events.get(&size)
    }

    /// ω ∩ Ω_υ.
    pub fn restrict(&self, size: usize) -> GeneralizedEvent {
        GeneralizedEvent {
            events: self.events.iter().filter(|(s, _)| **s == size).map(|(s, e)| (*s, e.clone())).collect(),
        }
    }

    pub fn intersection(&self, other: &GeneralizedEvent) -> GeneralizedEvent {
        GeneralizedEvent {
            events: self
                .events
                .iter()
                .filter_map(|(s, e)| other.events.get(s).map(|o| (*s, e.intersection(o))))
                .collect(),
        }
    }
}

/// The worlds of Ω_size whose first `event.universe_size()` objects form a
/// world of `event`.
pub fn cylinder(event: &Event, size: usize) -> Event {
    let mask = (1usize << (2 * event.universe_size())) - 1;
    Event::from_fn(size, |w| event.contains(w & mask))
}

pub fn mixture_probability(mix: &MixtureModel, rho: &Proposition) -> Result<Rational, CosmologyError> {
    Ok(mix.probability(&mix.generalized_event(rho)?))
}

fn posterior(mix: &MixtureModel, omega: &GeneralizedEvent) -> Result<BTreeMap<usize, Rational>, CosmologyError> {
    let total = mix.probability(omega);
    if total.is_zero() {
        return Err(CosmologyError::ZeroEvidence);
    }
    Ok(mix
        .q
        .keys()
        .map(|&size| (size, mix.probability(&omega.restrict(size)) / &total))
        .collect())
}

/// P̃(Ω_υ | ω_ρ) for every size.
pub fn size_posterior(mix: &MixtureModel, rho: &Proposition) -> Result<BTreeMap<usize, Rational>, CosmologyError> {
    posterior(mix, &mix.generalized_event(rho)?)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub holds: bool,
    #[serde(serialize_with = "rational::serialize_rational", deserialize_with = "rational::deserialize_rational")]
    pub max_deviation: Rational,
    pub given_d: BTreeMap<usize, String>,
    pub given_ed: BTreeMap<usize, String>,
}

/// Evidence leaves the size posterior unchanged: P̃(Ω_υ | ω_E ∩ ω_D) =
/// P̃(Ω_υ | ω_D) for every υ with q_υ > 0.
pub fn assumption_check(
    mix: &MixtureModel,
    e: &Proposition,
    d: &Proposition,
) -> Result<AssumptionReport, CosmologyError> {
    let omega_d = mix.generalized_event(d)?;
    let omega_ed = mix.generalized_event(e)?.intersection(&omega_d);
    let given_d = posterior(mix, &omega_d)?;
    let given_ed = posterior(mix, &omega_ed)?;
    let mut max_deviation = Rational::zero();
    for size in mix.support() {
        let dev = (&given_ed[&size] - &given_d[&size]).abs();
        if dev > max_deviation {
            max_deviation = dev;
        }
    }
    let show = |m: &BTreeMap<usize, Rational>| m.iter().map(|(s, r)| (*s, rational::to_fraction_string(r))).collect();
    Ok(AssumptionReport {
        holds: max_deviation.is_zero(),
        max_deviation,
        given_d: show(&given_d),
        given_ed: show(&given_ed),
    })
}

/// Premise: the size posterior is unaffected by E and every supported size
/// has P_υ(H | E·D) > P_υ(H | D). Conclusion: P̃(ω_H | ω_E ∩ ω_D) > P̃(ω_H | ω_D).
pub fn proposition1_check(mix: &MixtureModel, e: &Proposition, d: &Proposition) -> Result<GuardedResult, CosmologyError> {
    let rule = format!(
        "proposition1(alpha={}, beta={}, E={}, D={})",
        mix.alpha,
        mix.beta,
        crate::prop_lang::format(e),
        crate::prop_lang::format(d)
    );
    let mut result = GuardedResult::new(rule);
    let assumption = match assumption_check(mix, e, d) {
        Ok(a) => a,
        Err(CosmologyError::ZeroEvidence) => {
            result.witnesses.push("size posterior undefined".into());
            return Ok(result);
        }
        Err(err) => return Err(err),
    };
    if !assumption.holds {
        result.witnesses.push(format!(
            "evidence shifts the size posterior by up to {}",
            exact_and_approx(&assumption.max_deviation)
        ));
        return Ok(result);
    }
    let h = mix.generalized_event(&Proposition::H)?;
    let omega_d = mix.generalized_event(d)?;
    let omega_ed = mix.generalized_event(e)?.intersection(&omega_d);
    for size in mix.support() {
        let m = &mix.components[&size];
        let h_s = h.slice(size).expect("size in range");
        let with = m.conditional(h_s, omega_ed.slice(size).expect("size in range"));
        let without = m.conditional(h_s, omega_d.slice(size).expect("size in range"));
        result.instances += 1;
        match (with, without) {
            (Ok(l), Ok(r)) if l > r => {}
            (Ok(l), Ok(r)) => {
                result.witnesses.push(format!(
                    "size {size}: {} vs {}",
                    exact_and_approx(&l),
                    exact_and_approx(&r)
                ));
                return Ok(result);
            }
            _ => {
                result.witnesses.push(format!("size {size}: conditional undefined"));
                return Ok(result);
            }
        }
    }
    result.premise = true;
    let p_ed = mix.probability(&omega_ed);
    let p_d = mix.probability(&omega_d);
    if p_ed.is_zero() || p_d.is_zero() {
        result.witnesses.push("mixture conditional undefined".into());
        result.premise = false;
        return Ok(result);
    }
    let lhs = mix.probability(&h.intersection(&omega_ed)) / p_ed;
    let rhs = mix.probability(&h.intersection(&omega_d)) / p_d;
    result.conclusion = Conclusion::from_bool(lhs > rhs);
    Ok(result.with_values(lhs, rhs))
}

/// q uniform over α..=β.
pub fn uniform_size_prior(alpha: usize, beta: usize) -> BTreeMap<usize, Rational> {
    let count = (beta + 1).saturating_sub(alpha).max(1) as i64;
    (alpha..=beta).map(|s| (s, rational::ratio(1, count))).collect()
}

fn random_weights(rng: &mut ChaCha8Rng, count: usize) -> Vec<Rational> {
    let raw: Vec<u64> = (0..count).map(|_| rng.gen_range(1..=64)).collect();
    let total: u64 = raw.iter().sum();
    raw.iter().map(|&w| rational::ratio(w as i64, total as i64)).collect()
}

/// Seeded mixture whose components are iid products of one shared θ.
pub fn random_iid_mixture(alpha: usize, beta: usize, seed: u64) -> Result<MixtureModel, CosmologyError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let theta = random_weights(&mut rng, 4);
    let theta = CategoryPrior::new([theta[0].clone(), theta[1].clone(), theta[2].clone(), theta[3].clone()])?;
    let q = random_weights(&mut rng, beta + 1 - alpha);
    let q = (alpha..=beta).zip(q).collect();
    MixtureModel::from_family(alpha, beta, q, |size| iid_product_measure(size, &theta))
}

/// Seeded mixture with independent random exchangeable components.
pub fn random_mixture(alpha: usize, beta: usize, seed: u64) -> Result<MixtureModel, CosmologyError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = random_weights(&mut rng, beta + 1 - alpha);
    let q = (alpha..=beta).zip(q).collect();
    let base: u64 = rng.gen();
    MixtureModel::from_family(alpha, beta, q, |size| {
        random_exchangeable_measure(size, base.wrapping_add(size as u64))
    })
}

#[derive(Deserialize)]
struct MixtureFile {
    alpha: usize,
    beta: usize,
    q: BTreeMap<String, String>,
    components: BTreeMap<String, serde_json::Value>,
}

/// Parses `{"alpha":…, "beta":…, "q": {"2":"1/2",…}, "components": {"2": …}}`
/// where each component is a measure file object or a measure spec string.
pub fn mixture_from_json(text: &str, seed: u64) -> Result<MixtureModel, CosmologyError> {
    let file: MixtureFile = serde_json::from_str(text).map_err(|e| CosmologyError::Format(e.to_string()))?;
    let size = |key: &str| {
        key.parse::<usize>()
            .map_err(|_| CosmologyError::Format(format!("size key {key:?} is not an integer")))
    };
    let mut q = BTreeMap::new();
    for (key, value) in &file.q {
        let w = parse_rational(value).map_err(|e| CosmologyError::Format(format!("q[{key}]: {e}")))?;
        q.insert(size(key)?, w);
    }
    let mut components = BTreeMap::new();
    for (key, value) in &file.components {
        let n = size(key)?;
        let m = match value {
            serde_json::Value::String(spec) => parse_measure_spec(spec)?.build(n, seed)?,
            other => measure_from_json(&other.to_string())?,
        };
        components.insert(n, m);
    }
    MixtureModel::new(file.alpha, file.beta, q, components)
}

pub fn mixture_from_file(path: impl AsRef<Path>, seed: u64) -> Result<MixtureModel, CosmologyError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| CosmologyError::Io(format!("{}: {e}", path.display())))?;
    mixture_from_json(&text, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::uniform_measure;
    use crate::rational::ratio;

    fn uniform_mix(alpha: usize, beta: usize) -> MixtureModel {
        MixtureModel::from_family(alpha, beta, uniform_size_prior(alpha, beta), uniform_measure).unwrap()
    }

    #[test]
    fn uniform_h_probability() {
        // 1/2 · 9/16 + 1/2 · 27/64
        assert_eq!(mixture_probability(&uniform_mix(2, 3), &Proposition::H).unwrap(), ratio(63, 128));
    }

    #[test]
    fn posterior_tilts_to_small_sizes() {
        let post = size_posterior(&uniform_mix(2, 4), &Proposition::H).unwrap();
        assert!(post[&2] > post[&3] && post[&3] > post[&4]);
        let prior = size_posterior(&uniform_mix(2, 4), &Proposition::top()).unwrap();
        assert_eq!(prior, uniform_size_prior(2, 4));
    }

    #[test]
    fn rejects_objects_beyond_alpha() {
        let err = mixture_probability(&uniform_mix(2, 3), &Proposition::f(3)).unwrap_err();
        assert_eq!(err, CosmologyError::ObjectBeyondAlpha { object: 3, alpha: 2 });
    }

    #[test]
    fn size_dependent_theta_breaks_assumption() {
        let q = uniform_size_prior(2, 3);
        let mix = MixtureModel::from_family(2, 3, q, |size| {
            let t = ratio(1, size as i64 + 1);
            let rest = (ratio(1, 1) - &t) / ratio(3, 1);
            iid_product_measure(size, &CategoryPrior::new([t, rest.clone(), rest.clone(), rest])?)
        })
        .unwrap();
        let rep = assumption_check(&mix, &Proposition::fg(1), &Proposition::top()).unwrap();
        assert!(!rep.holds && rep.max_deviation > Rational::zero());
        let r = proposition1_check(&mix, &Proposition::fg(1), &Proposition::top()).unwrap();
        assert_eq!(r.conclusion, Conclusion::NotEvaluated);
    }

    #[test]
    fn iid_mixture_satisfies_proposition1() {
        let mix = random_iid_mixture(2, 5, 3).unwrap();
        let r = proposition1_check(&mix, &Proposition::fg(1), &Proposition::top()).unwrap();
        assert!(r.premise && r.conclusion == Conclusion::Holds, "{r}");
    }

    #[test]
    fn mixture_json_accepts_specs() {
        let text = r#"{"alpha":2,"beta":3,"q":{"2":"1/2","3":"1/2"},"components":{"2":"uniform","3":"uniform"}}"#;
        assert_eq!(mixture_from_json(text, 0).unwrap(), uniform_mix(2, 3));
    }
}
