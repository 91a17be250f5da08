//! Setting 1: backgrounds that completely describe some objects.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::checks::check_nc_events;
use super::{Comparison, Conclusion, GuardedResult, Relation, RuleError};
use crate::measures::Measure;
use crate::model::{backgrounds, classify_background, Background, BackgroundFamily, CategorySet, Event, Proposition, QCategory};
use crate::prop_lang;
use crate::rational::{self, Rational};

/// Exhaustive Δ sweeps are bounded to this universe size.
pub const SWEEP_CAP: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PremiseCheck {
    pub holds: bool,
    pub instances: usize,
    pub witness: Option<String>,
    #[serde(
        serialize_with = "rational::serialize_opt_rational",
        deserialize_with = "rational::deserialize_opt_rational"
    )]
    pub lhs: Option<Rational>,
    #[serde(
        serialize_with = "rational::serialize_opt_rational",
        deserialize_with = "rational::deserialize_opt_rational"
    )]
    pub rhs: Option<Rational>,
}

impl PremiseCheck {
    pub(crate) fn failed(instances: usize, witness: String, values: Option<(Rational, Rational)>) -> PremiseCheck {
        let (lhs, rhs) = values.map_or((None, None), |(l, r)| (Some(l), Some(r)));
        PremiseCheck {
            holds: false,
            instances,
            witness: Some(witness),
            lhs,
            rhs,
        }
    }
}

fn check_cap(n: usize) -> Result<(), RuleError> {
    if n > SWEEP_CAP {
        return Err(RuleError::InvalidArgument(format!(
            "exhaustive background sweeps are limited to N <= {SWEEP_CAP}"
        )));
    }
    Ok(())
}

fn describe(b: &Background) -> String {
    prop_lang::format(&b.to_proposition())
}

/// Walks pr(FḠ_b | FG_a·B) against pr(FG_b | B) for every ordered pair and
/// every canonical B ∈ Δ avoiding a and b; `accept` decides each instance.
fn fg_sweep(m: &Measure, accept: fn(Ordering) -> bool, label: &str) -> Result<PremiseCheck, RuleError> {
    let n = m.universe_size();
    check_cap(n)?;
    if !m.is_regular() {
        return Ok(PremiseCheck::failed(0, "measure is not regular".into(), None));
    }
    let pairs: Vec<(usize, usize)> = (1..=n)
        .flat_map(|a| (1..=n).filter(move |&b| b != a).map(move |b| (a, b)))
        .collect();
    type PairOutcome = Result<(usize, Option<(String, Rational, Rational)>), RuleError>;
    let per_pair: Vec<PairOutcome> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let fg_a = Proposition::fg(a).event(n)?;
            let fng_b = Proposition::f_not_g(b).event(n)?;
            let mut count = 0;
            for bg in backgrounds(n, &[a, b], BackgroundFamily::Delta) {
                count += 1;
                let cmp = Comparison::new(m, &fng_b, &fg_a, &bg.event(n)?);
                if !accept(cmp.ordering()) {
                    let w = format!("{label} fails at a={a}, b={b}, B={}", describe(&bg));
                    return Ok((count, Some((w, cmp.lhs(), cmp.rhs()))));
                }
            }
            Ok((count, None))
        })
        .collect();
    let mut instances = 0;
    for r in per_pair {
        let (count, failure) = r?;
        instances += count;
        if let Some((w, l, r)) = failure {
            return Ok(PremiseCheck::failed(instances, w, Some((l, r))));
        }
    }
    Ok(PremiseCheck {
        holds: true,
        instances,
        witness: None,
        lhs: None,
        rhs: None,
    })
}

/// ∀B∈Δ, a,b ∉ inds_B: pr(FḠ_b | FG_a·B) ≤ pr(FḠ_b | B), together with
/// regularity.
pub fn theorem1_premise(m: &Measure) -> Result<PremiseCheck, RuleError> {
    fg_sweep(m, |o| o != Ordering::Greater, "pr(FnG_b | FG_a.B) <= pr(FnG_b | B)")
}

/// Restriction (i): the strict reverse of the Theorem-1 premise.
pub fn theorem2_premise_i(m: &Measure) -> Result<PremiseCheck, RuleError> {
    fg_sweep(m, |o| o == Ordering::Greater, "pr(FnG_b | FG_a.B) > pr(FnG_b | B)")
}

fn small_delta_instances(n: usize) -> Vec<(Background, usize)> {
    backgrounds(n, &[], BackgroundFamily::SmallDelta)
        .flat_map(|d| {
            (1..=n)
                .filter(|a| !d.mentions(*a))
                .map(|a| (d.clone(), a))
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Premise sweep, then NC for every D ∈ δ and a ∉ inds_D.
pub fn theorem1_sweep(m: &Measure) -> Result<GuardedResult, RuleError> {
    let n = m.universe_size();
    let premise = theorem1_premise(m)?;
    let mut result = GuardedResult::new(format!("theorem1(N={n})"));
    result.instances = premise.instances;
    if !premise.holds {
        result.witnesses.extend(premise.witness);
        result.lhs = premise.lhs;
        result.rhs = premise.rhs;
        return Ok(result);
    }
    result.premise = true;
    let cases = small_delta_instances(n);
    let verdicts: Vec<Result<(String, super::Verdict), RuleError>> = cases
        .par_iter()
        .map(|(d, a)| {
            let v = check_nc_events(m, &d.event(n)?, *a)?;
            Ok((format!("NC fails for D={}, a={a}: {v}", describe(d)), v))
        })
        .collect();
    result.instances += cases.len();
    let mut failed = false;
    for v in verdicts {
        let (label, verdict) = v?;
        if verdict.relation != Relation::Confirms {
            failed = true;
            if result.witnesses.len() < 5 {
                result.witnesses.push(label);
            }
        }
    }
    result.conclusion = Conclusion::from_bool(!failed);
    Ok(result)
}

struct Setting1Target {
    d: Event,
    inds: Vec<usize>,
}

fn small_delta_target(m: &Measure, d: &Proposition, a: usize) -> Result<Setting1Target, RuleError> {
    let n = m.universe_size();
    let class = classify_background(d, n)?;
    if !class.is_small_delta() {
        return Err(RuleError::BackgroundFamily(format!(
            "{} is not a complete description avoiding FnG",
            prop_lang::format(d)
        )));
    }
    if a == 0 || a > n {
        return Err(RuleError::InvalidArgument(format!("object {a} outside 1..={n}")));
    }
    let inds: Vec<usize> = class.inds().into_iter().collect();
    if inds.contains(&a) {
        return Err(RuleError::InvalidArgument(format!("object {a} is described by the background")));
    }
    Ok(Setting1Target { d: d.event(n)?, inds })
}

/// Restriction (ii) for every choice of b₁ among the objects outside
/// inds_D ∪ {a}:
/// pr(¬(F→G)_a | F→G_{b₁..bₙ}·D) < pr(FḠ_b₁ | FG_a·D) − pr(FḠ_b₁ | D).
pub fn theorem2_premise_ii(m: &Measure, d: &Proposition, a: usize) -> Result<PremiseCheck, RuleError> {
    let target = small_delta_target(m, d, a)?;
    premise_ii_for(m, &target.d, &target.inds, a)
}

fn premise_ii_for(m: &Measure, d: &Event, inds: &[usize], a: usize) -> Result<PremiseCheck, RuleError> {
    let n = m.universe_size();
    let others: Vec<usize> = (1..=n).filter(|b| *b != a && !inds.contains(b)).collect();
    if others.is_empty() {
        return Ok(PremiseCheck::failed(0, "no unmentioned object besides a".into(), None));
    }
    let undefined = |what: &str| RuleError::Undefined(what.to_string());
    let x = Proposition::each(CategorySet::F_IMPLIES_G, others.iter().copied()).event(n)?;
    let not_fi_a = Proposition::atom(a, CategorySet::single(QCategory::Q2)).event(n)?;
    let lhs = m
        .conditional(&not_fi_a, &x.intersection(d))
        .map_err(|_| undefined("pr(X·D) = 0"))?;
    let fg_a_d = Proposition::fg(a).event(n)?.intersection(d);
    for (i, &b1) in others.iter().enumerate() {
        let fng = Proposition::f_not_g(b1).event(n)?;
        let with_e = m.conditional(&fng, &fg_a_d).map_err(|_| undefined("pr(FG_a·D) = 0"))?;
        let without = m.conditional(&fng, d).map_err(|_| undefined("pr(D) = 0"))?;
        let rhs = with_e - without;
        if lhs >= rhs {
            return Ok(PremiseCheck::failed(
                i + 1,
                format!("restriction (ii) fails for b1={b1}"),
                Some((lhs, rhs)),
            ));
        }
    }
    Ok(PremiseCheck {
        holds: true,
        instances: others.len(),
        witness: None,
        lhs: Some(lhs),
        rhs: None,
    })
}

fn theorem2_instance(
    m: &Measure,
    premise_i: &PremiseCheck,
    d: &Event,
    d_label: &str,
    inds: &[usize],
    a: usize,
) -> Result<GuardedResult, RuleError> {
    let mut result = GuardedResult::new(format!("theorem2(D={d_label}, a={a})"));
    result.instances = premise_i.instances;
    if !premise_i.holds {
        result.witnesses.push(format!(
            "restriction (i): {}",
            premise_i.witness.clone().unwrap_or_default()
        ));
        return Ok(result);
    }
    let ii = premise_ii_for(m, d, inds, a)?;
    result.instances += ii.instances;
    if !ii.holds {
        result.witnesses.push(format!("restriction (ii): {}", ii.witness.unwrap_or_default()));
        result.lhs = ii.lhs;
        result.rhs = ii.rhs;
        return Ok(result);
    }
    result.premise = true;
    let v = check_nc_events(m, d, a)?;
    result.instances += 1;
    result.lhs = v.lhs.clone();
    result.rhs = v.rhs.clone();
    let holds = matches!(v.relation, Relation::Disconfirms | Relation::Neutral);
    if !holds {
        result.witnesses.push(format!("NC verdict {v}"));
    }
    result.conclusion = Conclusion::from_bool(holds);
    Ok(result)
}

/// Restrictions (i) and (ii) for one D ∈ δ and a ∉ inds_D; when both hold
/// the conclusion is that NC fails (DISCONFIRMS or NEUTRAL).
pub fn theorem2_premise_check(m: &Measure, d: &Proposition, a: usize) -> Result<GuardedResult, RuleError> {
    let target = small_delta_target(m, d, a)?;
    let premise_i = theorem2_premise_i(m)?;
    theorem2_instance(m, &premise_i, &target.d, &prop_lang::format(d), &target.inds, a)
}

/// [`theorem2_premise_check`] over every D ∈ δ and a ∉ inds_D. The
/// aggregate premise holds when restriction (i) holds and (ii) holds for at
/// least one instance; the conclusion fails if any such instance confirms.
pub fn theorem2_sweep(m: &Measure) -> Result<GuardedResult, RuleError> {
    let n = m.universe_size();
    let premise_i = theorem2_premise_i(m)?;
    let mut result = GuardedResult::new(format!("theorem2(N={n})"));
    result.instances = premise_i.instances;
    if !premise_i.holds {
        result.witnesses.extend(premise_i.witness);
        result.lhs = premise_i.lhs;
        result.rhs = premise_i.rhs;
        return Ok(result);
    }
    let cases = small_delta_instances(n);
    let outcomes: Vec<Result<GuardedResult, RuleError>> = cases
        .par_iter()
        .map(|(d, a)| {
            let inds: Vec<usize> = d.inds().into_iter().collect();
            theorem2_instance(m, &premise_i, &d.event(n)?, &describe(d), &inds, *a)
        })
        .collect();
    let mut any_premise = false;
    let mut failed = false;
    for o in outcomes {
        let o = o?;
        result.instances += o.instances - premise_i.instances;
        if o.premise {
            any_premise = true;
            if o.conclusion == Conclusion::Fails {
                failed = true;
                if result.witnesses.len() < 5 {
                    result.witnesses.push(format!("{}: {}", o.rule, o.witnesses.join("; ")));
                }
            }
        }
    }
    result.premise = any_premise;
    if any_premise {
        result.conclusion = Conclusion::from_bool(!failed);
    } else {
        result.witnesses.push("restriction (ii) holds for no background".into());
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{carnap_measure, maher_measure, uniform_measure, CategoryPrior, MaherParams};
    use crate::rational::ratio;

    #[test]
    fn uniform_and_carnap_pass_theorem1() {
        let u = theorem1_sweep(&uniform_measure(3).unwrap()).unwrap();
        assert!(u.premise && u.conclusion == Conclusion::Holds, "{u}");
        let c = theorem1_sweep(&carnap_measure(3, &ratio(2, 1), &CategoryPrior::uniform()).unwrap()).unwrap();
        assert!(c.premise && c.conclusion == Conclusion::Holds, "{c}");
    }

    #[test]
    fn premise_failure_skips_conclusion() {
        let m = maher_measure(2, &MaherParams::counterexample()).unwrap();
        let r = theorem1_sweep(&m).unwrap();
        assert!(!r.premise);
        assert_eq!(r.conclusion, Conclusion::NotEvaluated);
        assert!(!r.witnesses.is_empty());
    }

    #[test]
    fn uniform_fails_strict_restriction() {
        let u = uniform_measure(2).unwrap();
        assert!(!theorem2_premise_i(&u).unwrap().holds);
        let c = carnap_measure(2, &ratio(2, 1), &CategoryPrior::uniform()).unwrap();
        assert!(!theorem2_premise_i(&c).unwrap().holds);
    }

    #[test]
    fn rejects_large_universes() {
        assert!(theorem1_premise(&uniform_measure(6).unwrap()).is_err());
    }
}
