//! Parameter sweeps, threshold bisection and the seeded property harness.
//!
//! Grid points and trials are evaluated in parallel and gathered in
//! canonical order, so every report is independent of thread scheduling.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

use crate::cosmology::{proposition1_check, random_iid_mixture, random_mixture, CosmologyError};
use crate::measures::{
    carnap_measure, random_exchangeable_measure, random_measure, CategoryPrior, MaherParams, Measure, MeasureError,
    MeasureSpec,
};
use crate::model::{classify_background, Background, CategorySet, ModelError, Proposition, MAX_UNIVERSE, PREDICATE_NAMES};
use crate::prop_lang;
use crate::rational::{self, parse_rational, Rational};
use crate::rules::{
    check_nc, check_pj, check_ra, group_pj_check, hypergeometric_check, setting2_checks, theorem1_premise,
    theorem1_sweep, theorem2_premise_i, theorem2_premise_ii, theorem2_sweep, xi_factors, Conclusion, GuardedResult,
    PjMode, Relation, RuleError, SWEEP_CAP,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("invalid sweep spec: {0}")]
    Spec(String),
    #[error("predicate does not change between {lo} and {hi}")]
    NoSignChange { lo: String, hi: String },
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Rule(#[from] RuleError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Cosmology(#[from] CosmologyError),
    #[error("{0}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Uniform,
    Iid,
    Carnap,
    Maher,
    RandomExch,
    Random,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Uniform => "uniform",
            Family::Iid => "iid",
            Family::Carnap => "carnap",
            Family::Maher => "maher",
            Family::RandomExch => "random_exch",
            Family::Random => "random",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepRule {
    Nc,
    Pj,
    Ra,
    Xi,
    Thm1,
    Thm2,
    Thm4,
    Thm5,
}

impl fmt::Display for SweepRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepRule::Nc => "nc",
            SweepRule::Pj => "pj",
            SweepRule::Ra => "ra",
            SweepRule::Xi => "xi",
            SweepRule::Thm1 => "thm1",
            SweepRule::Thm2 => "thm2",
            SweepRule::Thm4 => "thm4",
            SweepRule::Thm5 => "thm5",
        })
    }
}

fn default_rules() -> Vec<SweepRule> {
    vec![SweepRule::Nc]
}

fn default_background() -> String {
    "T".into()
}

fn default_a() -> usize {
    1
}

fn default_b() -> usize {
    2
}

fn default_psi() -> String {
    "G".into()
}

/// Accepts `"1/2"`, `"0.25"` or a bare JSON number.
fn rational_texts<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<String>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Item {
        Text(String),
        Number(serde_json::Number),
    }
    Ok(Vec::<Item>::deserialize(d)?
        .into_iter()
        .map(|i| match i {
            Item::Text(s) => s,
            Item::Number(n) => n.to_string(),
        })
        .collect())
}

/// A finite parameter grid over one measure family.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub family: Family,
    pub n: Vec<usize>,
    #[serde(default)]
    pub k: Vec<usize>,
    #[serde(default, deserialize_with = "rational_texts")]
    pub lambda: Vec<String>,
    #[serde(default, deserialize_with = "rational_texts")]
    pub pr_i: Vec<String>,
    #[serde(default, deserialize_with = "rational_texts")]
    pub pf: Vec<String>,
    #[serde(default, deserialize_with = "rational_texts")]
    pub pg: Vec<String>,
    /// Category weights in Q1..Q4 order (Carnap γ or iid θ).
    #[serde(default)]
    pub gamma: Vec<[String; 4]>,
    #[serde(default)]
    pub seeds: Vec<u64>,
    #[serde(default = "default_rules")]
    pub rules: Vec<SweepRule>,
    #[serde(default = "default_background")]
    pub background: String,
    #[serde(default = "default_a")]
    pub a: usize,
    #[serde(default = "default_b")]
    pub b: usize,
    /// Predicate for PJ rows.
    #[serde(default = "default_psi")]
    pub psi: String,
}

impl SweepSpec {
    pub fn new(family: Family, n: Vec<usize>) -> SweepSpec {
        SweepSpec {
            family,
            n,
            k: Vec::new(),
            lambda: Vec::new(),
            pr_i: Vec::new(),
            pf: Vec::new(),
            pg: Vec::new(),
            gamma: Vec::new(),
            seeds: Vec::new(),
            rules: default_rules(),
            background: default_background(),
            a: default_a(),
            b: default_b(),
            psi: default_psi(),
        }
    }

    pub fn from_json(text: &str) -> Result<SweepSpec, SearchError> {
        serde_json::from_str(text).map_err(|e| SearchError::Spec(e.to_string()))
    }

    /// Validates the spec and expands the grid in canonical order:
    /// N, k, λ, prI, pF, pG, γ, seed (last varies fastest).
    pub fn points(&self) -> Result<Vec<GridPoint>, SearchError> {
        let spec_err = |m: String| SearchError::Spec(m);
        if self.n.is_empty() {
            return Err(spec_err("n grid is empty".into()));
        }
        if let Some(&n) = self.n.iter().find(|&&n| n == 0 || n > MAX_UNIVERSE) {
            return Err(spec_err(format!("N = {n} outside 1..={MAX_UNIVERSE}")));
        }
        if self.rules.is_empty() {
            return Err(spec_err("no rules selected".into()));
        }
        psi_from_name(&self.psi)?;
        let parse_all = |name: &str, items: &[String]| -> Result<Vec<Rational>, SearchError> {
            items
                .iter()
                .map(|s| parse_rational(s).map_err(|e| spec_err(format!("{name}: {e}"))))
                .collect()
        };
        let lambda = parse_all("lambda", &self.lambda)?;
        let pr_i = parse_all("pr_i", &self.pr_i)?;
        let pf = parse_all("pf", &self.pf)?;
        let pg = parse_all("pg", &self.pg)?;
        let gamma = self
            .gamma
            .iter()
            .map(|g| {
                let mut values = Vec::with_capacity(4);
                for text in g {
                    values.push(parse_rational(text).map_err(|e| spec_err(format!("gamma: {e}")))?);
                }
                let values: [Rational; 4] = values.try_into().expect("four entries");
                Ok(CategoryPrior::new(values)?)
            })
            .collect::<Result<Vec<_>, SearchError>>()?;
        let used = |name: &str, present: bool, allowed: bool| -> Result<(), SearchError> {
            if present && !allowed {
                return Err(spec_err(format!("{name} is not a parameter of the {} family", self.family)));
            }
            Ok(())
        };
        let fam = self.family;
        used("lambda", !lambda.is_empty(), matches!(fam, Family::Carnap | Family::Maher))?;
        used("pr_i", !pr_i.is_empty(), fam == Family::Maher)?;
        used("pf", !pf.is_empty(), fam == Family::Maher)?;
        used("pg", !pg.is_empty(), fam == Family::Maher)?;
        used("gamma", !gamma.is_empty(), matches!(fam, Family::Carnap | Family::Iid))?;
        used("seeds", !self.seeds.is_empty(), matches!(fam, Family::RandomExch | Family::Random))?;
        let required = |name: &str, v: usize| {
            if v == 0 {
                Err(spec_err(format!("the {fam} family needs a {name} grid")))
            } else {
                Ok(())
            }
        };
        match fam {
            Family::Maher => {
                required("lambda", lambda.len())?;
                required("pr_i", pr_i.len())?;
                required("pf", pf.len())?;
                required("pg", pg.len())?;
            }
            Family::Carnap => required("lambda", lambda.len())?,
            Family::Iid => required("gamma", gamma.len())?,
            _ => {}
        }
        for (i, &n) in self.n.iter().enumerate() {
            if self.a == 0 || self.a > n || self.b == 0 || self.b > n {
                return Err(spec_err(format!("objects a={}, b={} must lie in 1..={n}", self.a, self.b)));
            }
            prop_lang::parse(&self.background, n).map_err(|e| SearchError::Parse(e.to_string()))?;
            if let Some(&k) = self.k.iter().find(|&&k| k == 0 || k > n) {
                return Err(spec_err(format!("k = {k} outside 1..={n} (N grid entry {i})")));
            }
        }
        let needs_k = self.rules.iter().any(|r| matches!(r, SweepRule::Thm4 | SweepRule::Thm5));
        if needs_k && self.k.is_empty() {
            return Err(spec_err("thm4/thm5 rows need a k grid".into()));
        }
        fn axis<T: Clone>(v: &[T]) -> Vec<Option<T>> {
            if v.is_empty() {
                vec![None]
            } else {
                v.iter().cloned().map(Some).collect()
            }
        }
        let gamma_axis = if fam == Family::Carnap && gamma.is_empty() {
            vec![Some(CategoryPrior::uniform())]
        } else {
            axis(&gamma)
        };
        let seed_axis = if matches!(fam, Family::RandomExch | Family::Random) && self.seeds.is_empty() {
            vec![Some(0)]
        } else {
            axis(&self.seeds)
        };
        let mut points = Vec::new();
        for &n in &self.n {
            for k in axis(&self.k) {
                for l in axis(&lambda) {
                    for pi in axis(&pr_i) {
                        for f in axis(&pf) {
                            for g in axis(&pg) {
                                for gm in &gamma_axis {
                                    for s in &seed_axis {
                                        let point = GridPoint {
                                            family: fam,
                                            n,
                                            k,
                                            lambda: l.clone(),
                                            pr_i: pi.clone(),
                                            pf: f.clone(),
                                            pg: g.clone(),
                                            gamma: gm.clone(),
                                            seed: *s,
                                        };
                                        point.measure_spec()?;
                                        points.push(point);
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(points)
    }
}

fn psi_from_name(name: &str) -> Result<CategorySet, SearchError> {
    PREDICATE_NAMES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, s)| *s)
        .ok_or_else(|| SearchError::Spec(format!("unknown predicate {name:?}")))
}

/// One point of a sweep grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridPoint {
    pub family: Family,
    pub n: usize,
    pub k: Option<usize>,
    pub lambda: Option<Rational>,
    pub pr_i: Option<Rational>,
    pub pf: Option<Rational>,
    pub pg: Option<Rational>,
    pub gamma: Option<CategoryPrior>,
    pub seed: Option<u64>,
}

impl GridPoint {
    pub fn maher(n: usize, params: &MaherParams) -> GridPoint {
        GridPoint {
            family: Family::Maher,
            n,
            k: None,
            lambda: Some(params.lambda.clone()),
            pr_i: Some(params.pr_i.clone()),
            pf: Some(params.pf.clone()),
            pg: Some(params.pg.clone()),
            gamma: None,
            seed: None,
        }
    }

    /// Grid point for a parametric measure spec (carnap or maher).
    pub fn from_measure_spec(n: usize, spec: &MeasureSpec) -> Result<GridPoint, SearchError> {
        let mut point = GridPoint {
            family: Family::Carnap,
            n,
            k: None,
            lambda: None,
            pr_i: None,
            pf: None,
            pg: None,
            gamma: None,
            seed: None,
        };
        match spec {
            MeasureSpec::Carnap { lambda, gamma } => {
                point.lambda = Some(lambda.clone());
                point.gamma = Some(gamma.clone());
            }
            MeasureSpec::Maher(p) => point = GridPoint::maher(n, p),
            other => {
                return Err(SearchError::Spec(format!(
                    "{} measures have no continuous parameter to move",
                    other.family()
                )))
            }
        }
        Ok(point)
    }

    pub fn measure_spec(&self) -> Result<MeasureSpec, SearchError> {
        let missing = |name: &str| SearchError::Spec(format!("{} point without {name}", self.family));
        let spec = match self.family {
            Family::Uniform => MeasureSpec::Uniform,
            Family::Iid => MeasureSpec::Iid(self.gamma.clone().ok_or_else(|| missing("gamma"))?),
            Family::Carnap => {
                let lambda = self.lambda.clone().ok_or_else(|| missing("lambda"))?;
                if lambda <= Rational::zero() {
                    return Err(SearchError::Spec(format!("lambda = {lambda} must be positive")));
                }
                MeasureSpec::Carnap {
                    lambda,
                    gamma: self.gamma.clone().unwrap_or_else(CategoryPrior::uniform),
                }
            }
            Family::Maher => {
                let params = MaherParams::new(
                    self.lambda.clone().ok_or_else(|| missing("lambda"))?,
                    self.pr_i.clone().ok_or_else(|| missing("pr_i"))?,
                    self.pf.clone().ok_or_else(|| missing("pf"))?,
                    self.pg.clone().ok_or_else(|| missing("pg"))?,
                );
                params.validate()?;
                MeasureSpec::Maher(params)
            }
            Family::RandomExch => MeasureSpec::RandomExch { seed: self.seed },
            Family::Random => MeasureSpec::Random { seed: self.seed },
        };
        Ok(spec)
    }

    pub fn measure(&self) -> Result<Measure, SearchError> {
        Ok(self.measure_spec()?.build(self.n, 0)?)
    }

    fn param(&self, p: Param) -> Option<&Rational> {
        match p {
            Param::Lambda => self.lambda.as_ref(),
            Param::PrI => self.pr_i.as_ref(),
            Param::Pf => self.pf.as_ref(),
            Param::Pg => self.pg.as_ref(),
        }
    }

    fn with_param(&self, p: Param, value: Rational) -> GridPoint {
        let mut out = self.clone();
        let slot = match p {
            Param::Lambda => &mut out.lambda,
            Param::PrI => &mut out.pr_i,
            Param::Pf => &mut out.pf,
            Param::Pg => &mut out.pg,
        };
        *slot = Some(value);
        out
    }
}

/// One rule evaluated at one grid point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleRow {
    pub rule: String,
    pub verdict: String,
    #[serde(serialize_with = "rational::serialize_opt_rational", deserialize_with = "rational::deserialize_opt_rational")]
    pub lhs: Option<Rational>,
    #[serde(serialize_with = "rational::serialize_opt_rational", deserialize_with = "rational::deserialize_opt_rational")]
    pub rhs: Option<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub family: Family,
    #[serde(rename = "N")]
    pub n: usize,
    pub k: Option<usize>,
    #[serde(serialize_with = "rational::serialize_opt_rational", deserialize_with = "rational::deserialize_opt_rational")]
    pub lambda: Option<Rational>,
    #[serde(serialize_with = "rational::serialize_opt_rational", deserialize_with = "rational::deserialize_opt_rational")]
    pub pr_i: Option<Rational>,
    #[serde(serialize_with = "rational::serialize_opt_rational", deserialize_with = "rational::deserialize_opt_rational")]
    pub pf: Option<Rational>,
    #[serde(serialize_with = "rational::serialize_opt_rational", deserialize_with = "rational::deserialize_opt_rational")]
    pub pg: Option<Rational>,
    pub gamma: Option<String>,
    pub seed: Option<u64>,
    /// Premise flags; `None` when not computable (N above the sweep cap, or
    /// the background is not a complete description).
    pub theorem1_premise: Option<bool>,
    pub theorem2_premise_i: Option<bool>,
    pub theorem2_premise_ii: Option<bool>,
    #[serde(serialize_with = "rational::serialize_opt_rational", deserialize_with = "rational::deserialize_opt_rational")]
    pub xi_product: Option<Rational>,
    pub rows: Vec<RuleRow>,
}

impl SweepRecord {
    pub fn row(&self, rule: &str) -> Option<&RuleRow> {
        self.rows.iter().find(|r| r.rule == rule)
    }
}

/// Short status for a guarded result.
pub fn guarded_verdict(r: &GuardedResult) -> String {
    if r.is_violation() {
        "VIOLATION".into()
    } else if !r.premise {
        "PREMISE_FAILS".into()
    } else {
        r.conclusion.to_string()
    }
}

fn guarded_row(rule: String, r: &GuardedResult) -> RuleRow {
    RuleRow {
        rule,
        verdict: guarded_verdict(r),
        lhs: r.lhs.clone(),
        rhs: r.rhs.clone(),
    }
}

fn evaluate_point(spec: &SweepSpec, point: &GridPoint) -> Result<SweepRecord, SearchError> {
    let m = point.measure()?;
    let n = point.n;
    let d = prop_lang::parse(&spec.background, n).map_err(|e| SearchError::Parse(e.to_string()))?;
    let psi = psi_from_name(&spec.psi)?;
    let (a, b) = (spec.a, spec.b);
    let capped = n <= SWEEP_CAP;
    let small_delta = classify_background(&d, n)?.is_small_delta() && !d.objects().contains(&a);
    let xi = if small_delta { xi_factors(&m, &d, a).ok().map(|x| x.product) } else { None };
    let mut rows = Vec::new();
    for rule in &spec.rules {
        match rule {
            SweepRule::Nc => {
                let v = check_nc(&m, &d, a)?;
                rows.push(RuleRow {
                    rule: "nc".into(),
                    verdict: v.relation.to_string(),
                    lhs: v.lhs,
                    rhs: v.rhs,
                });
            }
            SweepRule::Pj => rows.push(guarded_row("pj".into(), &check_pj(&m, psi, a, b, &d, PjMode::Weak)?)),
            SweepRule::Ra => rows.push(guarded_row("ra".into(), &check_ra(&m, a, b, &d)?)),
            SweepRule::Xi => rows.push(RuleRow {
                rule: "xi".into(),
                verdict: match &xi {
                    Some(x) if x > &Rational::one() => "GREATER_THAN_1".into(),
                    Some(_) => "AT_MOST_1".into(),
                    None => Relation::Undefined.to_string(),
                },
                lhs: xi.clone(),
                rhs: Some(Rational::one()),
            }),
            SweepRule::Thm1 if capped => rows.push(guarded_row("thm1".into(), &theorem1_sweep(&m)?)),
            SweepRule::Thm2 if capped => rows.push(guarded_row("thm2".into(), &theorem2_sweep(&m)?)),
            SweepRule::Thm1 | SweepRule::Thm2 => rows.push(RuleRow {
                rule: rule.to_string(),
                verdict: "NOT_EVALUATED".into(),
                lhs: None,
                rhs: None,
            }),
            SweepRule::Thm4 | SweepRule::Thm5 => {
                let k = point.k.expect("validated k grid");
                let rep = setting2_checks(&m, k, a)?;
                if *rule == SweepRule::Thm4 {
                    rows.push(guarded_row("thm4".into(), &rep.theorem4));
                } else {
                    rows.push(guarded_row("thm5-pj".into(), &rep.theorem5_pj));
                    rows.push(guarded_row("thm5-ra".into(), &rep.theorem5_ra));
                }
            }
        }
    }
    let theorem1 = capped.then(|| theorem1_premise(&m)).transpose()?.map(|p| p.holds);
    let theorem2_i = capped.then(|| theorem2_premise_i(&m)).transpose()?.map(|p| p.holds);
    let theorem2_ii = if small_delta {
        match theorem2_premise_ii(&m, &d, a) {
            Ok(p) => Some(p.holds),
            Err(RuleError::Undefined(_)) => None,
            Err(e) => return Err(e.into()),
        }
    } else {
        None
    };
    Ok(SweepRecord {
        family: point.family,
        n,
        k: point.k,
        lambda: point.lambda.clone(),
        pr_i: point.pr_i.clone(),
        pf: point.pf.clone(),
        pg: point.pg.clone(),
        gamma: point.gamma.as_ref().map(|g| g.to_string()),
        seed: point.seed,
        theorem1_premise: theorem1,
        theorem2_premise_i: theorem2_i,
        theorem2_premise_ii: theorem2_ii,
        xi_product: xi,
        rows,
    })
}

/// One record per grid point, in canonical grid order.
pub fn grid_sweep(spec: &SweepSpec) -> Result<Vec<SweepRecord>, SearchError> {
    let points = spec.points()?;
    points.par_iter().map(|p| evaluate_point(spec, p)).collect()
}

pub const CSV_HEADER: [&str; 18] = [
    "family",
    "N",
    "k",
    "lambda",
    "prI",
    "pF",
    "pG",
    "rule",
    "lhs",
    "rhs",
    "verdict",
    "thm1_premise",
    "thm2_premise_i",
    "thm2_premise_ii",
    "lhs_approx",
    "rhs_approx",
    "gamma",
    "seed",
];

fn opt_fraction(r: &Option<Rational>) -> String {
    r.as_ref().map(rational::to_fraction_string).unwrap_or_default()
}

fn opt_decimal(r: &Option<Rational>) -> String {
    r.as_ref().map(rational::decimal_string).unwrap_or_default()
}

fn opt_flag(b: Option<bool>) -> String {
    b.map(|b| if b { "pass" } else { "fail" }.to_string()).unwrap_or_default()
}

/// One CSV row per (record, rule).
pub fn records_to_csv(records: &[SweepRecord]) -> Result<String, SearchError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| SearchError::Spec(e.to_string());
    w.write_record(CSV_HEADER).map_err(io)?;
    for rec in records {
        for row in &rec.rows {
            w.write_record([
                rec.family.to_string(),
                rec.n.to_string(),
                rec.k.map(|k| k.to_string()).unwrap_or_default(),
                opt_fraction(&rec.lambda),
                opt_fraction(&rec.pr_i),
                opt_fraction(&rec.pf),
                opt_fraction(&rec.pg),
                row.rule.clone(),
                opt_fraction(&row.lhs),
                opt_fraction(&row.rhs),
                row.verdict.clone(),
                opt_flag(rec.theorem1_premise),
                opt_flag(rec.theorem2_premise_i),
                opt_flag(rec.theorem2_premise_ii),
                opt_decimal(&row.lhs),
                opt_decimal(&row.rhs),
                rec.gamma.clone().unwrap_or_default(),
                rec.seed.map(|s| s.to_string()).unwrap_or_default(),
            ])
            .map_err(io)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| SearchError::Spec(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Param {
    Lambda,
    PrI,
    Pf,
    Pg,
}

impl std::str::FromStr for Param {
    type Err = SearchError;
    fn from_str(s: &str) -> Result<Param, SearchError> {
        match s {
            "lambda" | "l" => Ok(Param::Lambda),
            "pri" | "pi" | "pr_i" => Ok(Param::PrI),
            "pf" => Ok(Param::Pf),
            "pg" => Ok(Param::Pg),
            _ => Err(SearchError::Spec(format!("unknown parameter {s:?}"))),
        }
    }
}

/// The flag whose flip is bracketed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Predicate {
    /// NC verdict for D and a is CONFIRMS.
    NcConfirms { background: Proposition, a: usize },
    Theorem1Premise,
    Theorem2PremiseI,
    Theorem2PremiseII { background: Proposition, a: usize },
    /// Synthetic: the moving parameter is below the threshold.
    Below(Rational),
}

impl Predicate {
    fn evaluate(&self, point: &GridPoint, value: &Rational) -> Result<bool, SearchError> {
        if let Predicate::Below(t) = self {
            return Ok(value < t);
        }
        let m = point.measure()?;
        Ok(match self {
            Predicate::NcConfirms { background, a } => check_nc(&m, background, *a)?.relation == Relation::Confirms,
            Predicate::Theorem1Premise => theorem1_premise(&m)?.holds,
            Predicate::Theorem2PremiseI => theorem2_premise_i(&m)?.holds,
            Predicate::Theorem2PremiseII { background, a } => match theorem2_premise_ii(&m, background, *a) {
                Ok(p) => p.holds,
                Err(RuleError::Undefined(_)) => false,
                Err(e) => return Err(e.into()),
            },
            Predicate::Below(_) => unreachable!(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bracket {
    pub param: Param,
    #[serde(serialize_with = "rational::serialize_rational", deserialize_with = "rational::deserialize_rational")]
    pub lo: Rational,
    #[serde(serialize_with = "rational::serialize_rational", deserialize_with = "rational::deserialize_rational")]
    pub hi: Rational,
    pub value_at_lo: bool,
    pub value_at_hi: bool,
    pub evaluations: usize,
}

impl Bracket {
    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> Rational {
        (&self.lo + &self.hi) / Rational::from_integer(2.into())
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    /// Distance from a claimed threshold to the bracket midpoint.
    pub fn deviation_from(&self, claim: &Rational) -> Rational {
        let d = claim - self.midpoint();
        if d < Rational::zero() {
            -d
        } else {
            d
        }
    }
}

impl fmt::Display for Bracket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:?} flips in [{}, {}] (~{} .. ~{}); {} at lo, {} at hi; {} evaluations",
            self.param,
            rational::to_fraction_string(&self.lo),
            rational::to_fraction_string(&self.hi),
            rational::decimal_string(&self.lo),
            rational::decimal_string(&self.hi),
            self.value_at_lo,
            self.value_at_hi,
            self.evaluations
        )
    }
}

/// 2^-20.
pub fn default_bisect_width() -> Rational {
    Rational::new(1.into(), (1u64 << 20).into())
}

/// Halves [lo, hi] with exact midpoints until the width is at most `width`.
pub fn bisect_threshold(
    base: &GridPoint,
    param: Param,
    lo: Rational,
    hi: Rational,
    predicate: &Predicate,
    width: &Rational,
) -> Result<Bracket, SearchError> {
    if lo >= hi {
        return Err(SearchError::Spec("bisection needs lo < hi".into()));
    }
    if width <= &Rational::zero() {
        return Err(SearchError::Spec("bisection width must be positive".into()));
    }
    if base.param(param).is_none() && !matches!(predicate, Predicate::Below(_)) {
        return Err(SearchError::Spec(format!("{param:?} is not a parameter of the {} family", base.family)));
    }
    let eval = |x: &Rational| predicate.evaluate(&base.with_param(param, x.clone()), x);
    let value_at_lo = eval(&lo)?;
    let value_at_hi = eval(&hi)?;
    if value_at_lo == value_at_hi {
        return Err(SearchError::NoSignChange {
            lo: rational::to_fraction_string(&lo),
            hi: rational::to_fraction_string(&hi),
        });
    }
    let (mut lo, mut hi) = (lo, hi);
    let mut evaluations = 2;
    let two = Rational::from_integer(2.into());
    while &(&hi - &lo) > width {
        let mid = (&lo + &hi) / &two;
        evaluations += 1;
        if eval(&mid)? == value_at_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Bracket {
        param,
        lo,
        hi,
        value_at_lo,
        value_at_hi,
        evaluations,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub trials: usize,
    pub seed: u64,
    pub n_min: usize,
    pub n_max: usize,
    /// Adds a deliberately false "theorem" to demonstrate that the harness
    /// reports violations.
    pub plant_broken: bool,
}

impl TrialConfig {
    pub fn new(trials: usize, seed: u64, n_max: usize) -> TrialConfig {
        TrialConfig {
            trials,
            seed,
            n_min: 2,
            n_max,
            plant_broken: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub property: String,
    pub trial: usize,
    pub seed: u64,
    #[serde(rename = "N")]
    pub n: usize,
    pub witness: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialReport {
    pub trials: usize,
    pub seed: u64,
    /// Instances checked per property.
    pub checks: BTreeMap<String, usize>,
    /// Instances whose premise held, per property.
    pub premises_held: BTreeMap<String, usize>,
    pub violations: Vec<Violation>,
    /// Failures of conjectures that are not theorems (informative only).
    pub counterexamples: Vec<Violation>,
    pub seeds: Vec<u64>,
}

impl TrialReport {
    pub fn violation_count(&self) -> usize {
        self.violations.len()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Default)]
struct TrialOutcome {
    checks: BTreeMap<String, usize>,
    premises: BTreeMap<String, usize>,
    violations: Vec<Violation>,
    counterexamples: Vec<Violation>,
}

impl TrialOutcome {
    fn guarded(&mut self, property: &str, r: &GuardedResult, trial: usize, seed: u64, n: usize) {
        *self.checks.entry(property.into()).or_default() += 1;
        if r.premise {
            *self.premises.entry(property.into()).or_default() += 1;
        }
        if r.is_violation() {
            self.violations.push(Violation {
                property: property.into(),
                trial,
                seed,
                n,
                witness: r.to_string(),
            });
        }
    }

    fn equality(&mut self, property: &str, ok: bool, witness: impl FnOnce() -> String, trial: usize, seed: u64, n: usize) {
        *self.checks.entry(property.into()).or_default() += 1;
        *self.premises.entry(property.into()).or_default() += 1;
        if !ok {
            self.violations.push(Violation {
                property: property.into(),
                trial,
                seed,
                n,
                witness: witness(),
            });
        }
    }
}

/// Seeded exchangeable measure: Carnap with drawn λ and γ when `carnap`,
/// otherwise [`random_exchangeable_measure`].
pub fn seeded_exchangeable_measure(n: usize, seed: u64, carnap: bool) -> Result<Measure, MeasureError> {
    if !carnap {
        return random_exchangeable_measure(n, seed);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lambda = Rational::new(rng.gen_range(1..=12).into(), 2.into());
    let raw: Vec<i64> = (0..4).map(|_| rng.gen_range(1..=8)).collect();
    let total: i64 = raw.iter().sum();
    let gamma = CategoryPrior::new([0, 1, 2, 3].map(|i| rational::ratio(raw[i], total)))?;
    carnap_measure(n, &lambda, &gamma)
}

/// Carnap every fourth trial, otherwise random exchangeable; odd trials
/// check Ξ on a non-exchangeable measure.
fn trial_measures(trial: usize, seed: u64, n: usize) -> Result<(Measure, Measure), SearchError> {
    let exch = seeded_exchangeable_measure(n, seed, trial.is_multiple_of(4))?;
    let xi_measure = if trial % 2 == 1 { random_measure(n, seed)? } else { exch.clone() };
    Ok((exch, xi_measure))
}

fn run_trial(config: &TrialConfig, trial: usize, seed: u64) -> Result<TrialOutcome, SearchError> {
    let span = config.n_max - config.n_min + 1;
    let n = config.n_min + (seed % span as u64) as usize;
    let (m, xi_m) = trial_measures(trial, seed, n)?;
    let mut out = TrialOutcome::default();

    // Ξ-equivalence over every D ∈ δ and a ∉ inds_D.
    for d in crate::model::backgrounds(n, &[], crate::model::BackgroundFamily::SmallDelta) {
        let prop = d.to_proposition();
        for a in (1..=n).filter(|a| !d.mentions(*a)) {
            let v = check_nc(&xi_m, &prop, a)?;
            if v.relation == Relation::Undefined {
                continue;
            }
            let Ok(x) = xi_factors(&xi_m, &prop, a) else { continue };
            let nc = v.relation == Relation::Confirms;
            out.equality(
                "xi-equivalence",
                nc == (x.product > Rational::one()),
                || format!("D={}, a={a}: NC {v}, xi product {}", prop_lang::format(&prop), x.product),
                trial,
                seed,
                n,
            );
        }
    }

    if n <= SWEEP_CAP {
        out.guarded("theorem1", &theorem1_sweep(&m)?, trial, seed, n);
        out.guarded("theorem2", &theorem2_sweep(&m)?, trial, seed, n);
    }
    for k in 1..=n {
        for a in 1..=n {
            let rep = setting2_checks(&m, k, a)?;
            out.guarded("theorem4", &rep.theorem4, trial, seed, n);
            out.guarded("theorem3-pj", &rep.theorem3_pj, trial, seed, n);
            out.guarded("theorem3-ra", &rep.theorem3_ra, trial, seed, n);
            out.guarded("theorem5-pj", &rep.theorem5_pj, trial, seed, n);
            out.guarded("theorem5-ra", &rep.theorem5_ra, trial, seed, n);
        }
        if n >= 2 {
            let h = hypergeometric_check(&m, k, 1, n)?;
            out.equality("hypergeometric", h.holds, || format!("k={k}: {h:?}"), trial, seed, n);
        }
    }
    if n >= 3 {
        let targets: Vec<usize> = (2..n).collect();
        let d = Background::from_constraints([(n, CategorySet::F)]);
        for psi in [CategorySet::G, CategorySet::F, CategorySet::F_IMPLIES_G] {
            for negative in [false, true] {
                let r = group_pj_check(&m, psi, 1, &targets, &d, negative)?;
                out.guarded("group-pj", &r, trial, seed, n);
            }
        }
    }
    let beta = (n + 2).min(crate::cosmology::BETA_CAP).min(5);
    let mixtures = [random_iid_mixture(1, beta, seed)?, random_mixture(1, beta, seed)?];
    for mix in &mixtures {
        let r = proposition1_check(mix, &Proposition::fg(1), &Proposition::top())?;
        out.guarded("proposition1", &r, trial, seed, n);
    }

    // Conjecture (not a theorem): every exchangeable measure satisfies NC
    // at D = ⊤.
    let nc = check_nc(&m, &Proposition::top(), 1)?;
    if nc.relation != Relation::Confirms && nc.relation != Relation::Undefined {
        out.counterexamples.push(Violation {
            property: "nc-always".into(),
            trial,
            seed,
            n,
            witness: nc.to_string(),
        });
    }

    if config.plant_broken {
        let mut r = GuardedResult::new("planted: NC never holds");
        r.premise = m.is_regular();
        if r.premise {
            r.conclusion = Conclusion::from_bool(nc.relation != Relation::Confirms);
        }
        out.guarded("planted", &r, trial, seed, n);
    }
    Ok(out)
}

/// Runs every property on `trials` seeded measures. Trial seeds are drawn
/// from one ChaCha stream up front, so the report does not depend on the
/// thread count.
pub fn random_trials(config: &TrialConfig) -> Result<TrialReport, SearchError> {
    if config.n_min == 0 || config.n_min > config.n_max || config.n_max > SWEEP_CAP {
        return Err(SearchError::Spec(format!(
            "trial universe sizes must satisfy 1 <= n_min <= n_max <= {SWEEP_CAP}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let seeds: Vec<u64> = (0..config.trials).map(|_| rng.gen()).collect();
    let outcomes: Vec<Result<TrialOutcome, SearchError>> = seeds
        .par_iter()
        .enumerate()
        .map(|(t, &s)| run_trial(config, t, s))
        .collect();
    let mut report = TrialReport {
        trials: config.trials,
        seed: config.seed,
        checks: BTreeMap::new(),
        premises_held: BTreeMap::new(),
        violations: Vec::new(),
        counterexamples: Vec::new(),
        seeds,
    };
    for o in outcomes {
        let o = o?;
        for (k, v) in o.checks {
            *report.checks.entry(k).or_default() += v;
        }
        for (k, v) in o.premises {
            *report.premises_held.entry(k).or_default() += v;
        }
        report.violations.extend(o.violations);
        report.counterexamples.extend(o.counterexamples);
    }
    Ok(report)
}
