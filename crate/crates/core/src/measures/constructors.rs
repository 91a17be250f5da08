use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{count_vectors, CategoryPrior, CountVector, Measure, MeasureError, Provenance};
use crate::model::{check_universe, world_count, Background, QCategory};
use crate::rational::{self, Rational};

/// Orbit weights for the random generators are drawn from `1..=ORBIT_WEIGHT_MAX`.
const ORBIT_WEIGHT_MAX: u32 = 1 << 16;

pub fn uniform_measure(n: usize) -> Result<Measure, MeasureError> {
    check_universe(n)?;
    let w = Rational::new(1.into(), num_bigint::BigInt::from(world_count(n)));
    Measure::from_orbit_weights(n, |_| w.clone(), Provenance::Uniform)
}

fn code_prior(prior: &CategoryPrior, code: usize) -> &Rational {
    prior.get(QCategory::from_code(code as u8))
}

/// Independent objects, each drawn from θ.
pub fn iid_product_measure(n: usize, theta: &CategoryPrior) -> Result<Measure, MeasureError> {
    Measure::from_orbit_weights(
        n,
        |c| {
            (0..4).fold(Rational::one(), |acc, code| {
                acc * rational::pow(code_prior(theta, code), c[code] as usize)
            })
        },
        Provenance::Iid { theta: theta.clone() },
    )
}

/// Rising product Π_{j<count} (j + x).
fn rising(x: &Rational, count: usize) -> Rational {
    (0..count).fold(Rational::one(), |acc, j| acc * (x + Rational::from_integer(j.into())))
}

/// Probability of one particular sequence with the given category counts
/// under the λ-continuum; counts and γ are paired index-wise.
fn continuum_sequence_probability(lambda: &Rational, gamma: &[Rational], counts: &[usize]) -> Rational {
    let n: usize = counts.iter().sum();
    let numerator = gamma
        .iter()
        .zip(counts)
        .fold(Rational::one(), |acc, (g, &c)| acc * rising(&(lambda * g), c));
    numerator / rising(lambda, n)
}

/// Sequential chain-rule weight of a single world under the λ-continuum,
/// computed object by object. Used as an independent oracle for the
/// closed-form orbit weights.
pub fn carnap_chain_weight(world: usize, n: usize, lambda: &Rational, gamma: &CategoryPrior) -> Rational {
    let mut seen = [0usize; 4];
    let mut weight = Rational::one();
    for i in 1..=n {
        let code = crate::model::category_code(world, i) as usize;
        let num = Rational::from_integer(seen[code].into()) + lambda * code_prior(gamma, code);
        let den = Rational::from_integer((i - 1).into()) + lambda;
        weight *= num / den;
        seen[code] += 1;
    }
    weight
}

fn check_lambda(lambda: &Rational) -> Result<(), MeasureError> {
    if lambda.is_positive() {
        Ok(())
    } else {
        Err(MeasureError::InvalidParameter(format!(
            "lambda must be positive, got {}",
            rational::to_fraction_string(lambda)
        )))
    }
}

fn check_open_unit(name: &str, value: &Rational) -> Result<(), MeasureError> {
    if value.is_positive() && value < &Rational::one() {
        Ok(())
    } else {
        Err(MeasureError::InvalidParameter(format!(
            "{name} must lie in (0, 1), got {}",
            rational::to_fraction_string(value)
        )))
    }
}

fn gamma_by_code(gamma: &CategoryPrior) -> [Rational; 4] {
    [0, 1, 2, 3].map(|code| code_prior(gamma, code).clone())
}

/// Carnap's λ-continuum over the four categories with prior γ.
pub fn carnap_measure(n: usize, lambda: &Rational, gamma: &CategoryPrior) -> Result<Measure, MeasureError> {
    check_lambda(lambda)?;
    let g = gamma_by_code(gamma);
    Measure::from_orbit_weights(
        n,
        |c| continuum_sequence_probability(lambda, &g, &c.map(|x| x as usize)),
        Provenance::Carnap {
            lambda: lambda.clone(),
            gamma: gamma.clone(),
        },
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MaherParams {
    #[serde(serialize_with = "rational::serialize_rational", deserialize_with = "rational::deserialize_rational")]
    pub lambda: Rational,
    #[serde(serialize_with = "rational::serialize_rational", deserialize_with = "rational::deserialize_rational")]
    pub pr_i: Rational,
    #[serde(serialize_with = "rational::serialize_rational", deserialize_with = "rational::deserialize_rational")]
    pub pf: Rational,
    #[serde(serialize_with = "rational::serialize_rational", deserialize_with = "rational::deserialize_rational")]
    pub pg: Rational,
}

impl MaherParams {
    pub fn new(lambda: Rational, pr_i: Rational, pf: Rational, pg: Rational) -> MaherParams {
        MaherParams { lambda, pr_i, pf, pg }
    }

    /// λ=2, prI=1/2, pF=1/1000, pG=1/10.
    pub fn counterexample() -> MaherParams {
        MaherParams::new(rational::ratio(2, 1), rational::ratio(1, 2), rational::ratio(1, 1000), rational::ratio(1, 10))
    }

    pub fn validate(&self) -> Result<(), MeasureError> {
        check_lambda(&self.lambda)?;
        check_open_unit("prI", &self.pr_i)?;
        check_open_unit("pF", &self.pf)?;
        check_open_unit("pG", &self.pg)
    }

    fn joint_prior(&self) -> CategoryPrior {
        CategoryPrior::product(&self.pf, &self.pg)
    }
}

/// Orbit weight of the independent component: two 2-category continua, one
/// over F/¬F and one over G/¬G. Counts are indexed by code.
fn maher_independent_orbit(p: &MaherParams, c: &[u8; 4]) -> Rational {
    let cv = CountVector {
        counts: [c[3], c[2], c[1], c[0]].map(|x| x as usize),
    };
    let n = cv.n();
    let one = Rational::one();
    let f = continuum_sequence_probability(&p.lambda, &[p.pf.clone(), &one - &p.pf], &[cv.n_f(), n - cv.n_f()]);
    let g = continuum_sequence_probability(&p.lambda, &[p.pg.clone(), &one - &p.pg], &[cv.n_g(), n - cv.n_g()]);
    f * g
}

fn maher_joint_orbit(p: &MaherParams, c: &[u8; 4]) -> Rational {
    let g = gamma_by_code(&p.joint_prior());
    continuum_sequence_probability(&p.lambda, &g, &c.map(|x| x as usize))
}

fn maher_checked_components(p: &MaherParams) -> Result<(), MeasureError> {
    check_lambda(&p.lambda)?;
    check_open_unit("pF", &p.pf)?;
    check_open_unit("pG", &p.pg)
}

/// The two-family component alone (the prI = 1 boundary).
pub fn maher_independent_measure(n: usize, params: &MaherParams) -> Result<Measure, MeasureError> {
    maher_checked_components(params)?;
    let mut p = params.clone();
    p.pr_i = Rational::one();
    Measure::from_orbit_weights(n, |c| maher_independent_orbit(&p, c), Provenance::Maher(p.clone()))
}

/// The four-category component alone (the prI = 0 boundary).
pub fn maher_joint_measure(n: usize, params: &MaherParams) -> Result<Measure, MeasureError> {
    maher_checked_components(params)?;
    let mut p = params.clone();
    p.pr_i = Rational::zero();
    Measure::from_orbit_weights(n, |c| maher_joint_orbit(&p, c), Provenance::Maher(p.clone()))
}

/// prI · (F-process × G-process) + (1 − prI) · joint 4-category process.
pub fn maher_measure(n: usize, params: &MaherParams) -> Result<Measure, MeasureError> {
    params.validate()?;
    let one = Rational::one();
    Measure::from_orbit_weights(
        n,
        |c| &params.pr_i * maher_independent_orbit(params, c) + (&one - &params.pr_i) * maher_joint_orbit(params, c),
        Provenance::Maher(params.clone()),
    )
}

/// The displayed predictive rule with prI as a fixed coefficient, for a
/// fresh object of category `q` given evidence counts.
pub fn maher_displayed_predictive(params: &MaherParams, q: QCategory, counts: &CountVector) -> Rational {
    let one = Rational::one();
    let n = counts.n();
    let den = Rational::from_integer(n.into()) + &params.lambda;
    let (n_f, p_f) = if q.is_f() {
        (counts.n_f(), params.pf.clone())
    } else {
        (n - counts.n_f(), &one - &params.pf)
    };
    let (n_g, p_g) = if q.is_g() {
        (counts.n_g(), params.pg.clone())
    } else {
        (n - counts.n_g(), &one - &params.pg)
    };
    let f_factor = (Rational::from_integer(n_f.into()) + &params.lambda * &p_f) / &den;
    let g_factor = (Rational::from_integer(n_g.into()) + &params.lambda * &p_g) / &den;
    let joint = (Rational::from_integer(counts.of(q).into()) + &params.lambda * &p_f * &p_g) / &den;
    &params.pr_i * f_factor * g_factor + (&one - &params.pr_i) * joint
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaherDiscrepancy {
    pub category: QCategory,
    pub evidence_count: usize,
    #[serde(serialize_with = "rational::serialize_rational", deserialize_with = "rational::deserialize_rational")]
    pub displayed: Rational,
    #[serde(serialize_with = "rational::serialize_rational", deserialize_with = "rational::deserialize_rational")]
    pub mixture: Rational,
    #[serde(serialize_with = "rational::serialize_rational", deserialize_with = "rational::deserialize_rational")]
    pub difference: Rational,
}

/// Compares the displayed predictive rule with the mixture measure's actual
/// conditional pr(q_b | evidence). The evidence must be a complete
/// description of the objects it mentions and must not mention `b`.
pub fn maher_predictive_report(
    measure: &Measure,
    params: &MaherParams,
    evidence: &Background,
    q: QCategory,
    b: usize,
) -> Result<MaherDiscrepancy, MeasureError> {
    let n = measure.universe_size();
    if evidence.mentions(b) {
        return Err(MeasureError::InvalidParameter(format!("evidence mentions object {b}")));
    }
    let mut cats = Vec::new();
    for &(_, set) in evidence.constraints() {
        cats.push(set.singleton().ok_or_else(|| {
            MeasureError::InvalidParameter("evidence must describe objects completely".into())
        })?);
    }
    let counts = CountVector::from_categories(cats);
    let displayed = maher_displayed_predictive(params, q, &counts);
    let target = crate::model::Proposition::category(b, q).event(n)?;
    let mixture = measure.conditional(&target, &evidence.event(n)?)?;
    Ok(MaherDiscrepancy {
        category: q,
        evidence_count: counts.n(),
        difference: &mixture - &displayed,
        displayed,
        mixture,
    })
}

/// Orbit weights uniform in 1..=2^16 from a seeded stream, visited in
/// lexicographic count-vector order.
pub fn random_exchangeable_measure(n: usize, seed: u64) -> Result<Measure, MeasureError> {
    check_universe(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let orbits = count_vectors(n);
    let draws: Vec<u32> = orbits.iter().map(|_| rng.gen_range(1..=ORBIT_WEIGHT_MAX)).collect();
    let total: num_bigint::BigInt = orbits
        .iter()
        .zip(&draws)
        .map(|(c, &d)| super::multinomial(c) * d)
        .sum();
    let lookup: std::collections::HashMap<[u8; 4], u32> = orbits.into_iter().zip(draws).collect();
    Measure::from_orbit_weights(
        n,
        |c| Rational::new(lookup[c].into(), total.clone()),
        Provenance::RandomExch { seed },
    )
}

/// Independent weight per world, uniform in 1..=2^16; generically not
/// exchangeable.
pub fn random_measure(n: usize, seed: u64) -> Result<Measure, MeasureError> {
    check_universe(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<u32> = (0..world_count(n)).map(|_| rng.gen_range(1..=ORBIT_WEIGHT_MAX)).collect();
    let total: u64 = draws.iter().map(|&d| d as u64).sum();
    let weights: Vec<Rational> = draws
        .iter()
        .map(|&d| Rational::new(d.into(), total.into()))
        .collect();
    Measure::from_weights(n, &weights, Provenance::Random { seed })
}
