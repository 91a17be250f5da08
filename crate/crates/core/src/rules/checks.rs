use std::cmp::Ordering;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::{conditional_or_none, determines, Comparison, Conclusion, GuardedResult, Relation, RuleError, Verdict};
use crate::measures::Measure;
use crate::model::{classify_background, CategorySet, Event, Proposition, QCategory};
use crate::prop_lang;
use crate::rational::{self, Rational};

/// Compares pr(H | E·D) with pr(H | D).
pub fn verdict_for_events(m: &Measure, h: &Event, e: &Event, d: &Event) -> Verdict {
    let ed = e.intersection(d);
    let m_d = m.mass(d);
    let m_ed = m.mass(&ed);
    if m_d.is_zero() {
        return Verdict::undefined("pr(D) = 0");
    }
    if m_ed.is_zero() {
        return Verdict::undefined("pr(E·D) = 0");
    }
    let hed = h.intersection(&ed);
    let lhs = Rational::new(m.mass(&hed).into(), m_ed.clone().into());
    let rhs = Rational::new(m.mass(&h.intersection(d)).into(), m_d.clone().into());
    let relation = if hed.is_empty() {
        Relation::Refutes
    } else {
        match lhs.cmp(&rhs) {
            Ordering::Greater => Relation::Confirms,
            Ordering::Less => Relation::Disconfirms,
            Ordering::Equal => Relation::Neutral,
        }
    };
    let note = (m_ed == m_d).then(|| "evidence is determined by the background".to_string());
    Verdict {
        relation,
        lhs: Some(lhs),
        rhs: Some(rhs),
        note,
    }
}

pub fn confirmation_verdict(
    m: &Measure,
    h: &Proposition,
    e: &Proposition,
    d: &Proposition,
) -> Result<Verdict, RuleError> {
    let n = m.universe_size();
    Ok(verdict_for_events(m, &h.event(n)?, &e.event(n)?, &d.event(n)?))
}

/// NC for one background event: E = FG_a against H. Backgrounds that
/// determine FG_a or H make the verdict undefined.
pub fn check_nc_events(m: &Measure, d: &Event, a: usize) -> Result<Verdict, RuleError> {
    let n = m.universe_size();
    let fg = Proposition::fg(a).event(n)?;
    let h = Proposition::H.event(n)?;
    if determines(m, d, &fg) {
        return Ok(Verdict::undefined(format!("background determines FG_{a}")));
    }
    if determines(m, d, &h) {
        return Ok(Verdict::undefined("background determines H"));
    }
    Ok(verdict_for_events(m, &h, &fg, d))
}

pub fn check_nc(m: &Measure, d: &Proposition, a: usize) -> Result<Verdict, RuleError> {
    check_object(m, a)?;
    check_nc_events(m, &d.event(m.universe_size())?, a)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PjMode {
    Weak,
    Strong,
}

fn check_object(m: &Measure, b: usize) -> Result<(), RuleError> {
    if b == 0 || b > m.universe_size() {
        return Err(RuleError::InvalidArgument(format!(
            "object {b} outside 1..={}",
            m.universe_size()
        )));
    }
    Ok(())
}

/// pr(ψ_b | ψ_a·D) ≥ pr(ψ_b | D) (strict for [`PjMode::Strong`]). The
/// premise records whether the instance is admissible: a ≠ b, D ∈ Δ and D
/// does not determine ψ_a or ψ_b.
pub fn check_pj(
    m: &Measure,
    psi: CategorySet,
    a: usize,
    b: usize,
    d: &Proposition,
    mode: PjMode,
) -> Result<GuardedResult, RuleError> {
    check_object(m, a)?;
    check_object(m, b)?;
    let n = m.universe_size();
    let rule = format!(
        "PJ({}{}, a={a}, b={b}, D={})",
        if mode == PjMode::Strong { "strong, " } else { "" },
        psi,
        prop_lang::format(d)
    );
    if psi.is_empty() {
        return Err(RuleError::InvalidArgument("empty predicate".into()));
    }
    if a == b {
        return Ok(GuardedResult::premise_failed(rule, "a and b must differ"));
    }
    let class = classify_background(d, n)?;
    if !class.is_delta() {
        return Ok(GuardedResult::premise_failed(
            rule,
            format!("background not in Delta: {}", class.diagnostic.unwrap_or_default()),
        ));
    }
    let d_event = d.event(n)?;
    let psi_a = Proposition::atom(a, psi).event(n)?;
    let psi_b = Proposition::atom(b, psi).event(n)?;
    if determines(m, &d_event, &psi_a) || determines(m, &d_event, &psi_b) {
        return Ok(GuardedResult::premise_failed(rule, "background determines psi_a or psi_b"));
    }
    let cmp = Comparison::new(m, &psi_b, &psi_a, &d_event);
    let holds = match mode {
        PjMode::Weak => cmp.ordering() != Ordering::Less,
        PjMode::Strong => cmp.ordering() == Ordering::Greater,
    };
    let mut r = GuardedResult::new(rule).with_values(cmp.lhs(), cmp.rhs());
    r.premise = true;
    r.instances = 1;
    r.conclusion = Conclusion::from_bool(holds);
    Ok(r)
}

/// pr(G_b | F_b·FG_a·D) > pr(G_b | F_b·D).
pub fn check_ra(m: &Measure, a: usize, b: usize, d: &Proposition) -> Result<GuardedResult, RuleError> {
    check_object(m, a)?;
    check_object(m, b)?;
    let n = m.universe_size();
    let rule = format!("RA(a={a}, b={b}, D={})", prop_lang::format(d));
    if a == b {
        return Ok(GuardedResult::premise_failed(rule, "a and b must differ"));
    }
    let class = classify_background(d, n)?;
    if !class.is_delta() {
        return Ok(GuardedResult::premise_failed(
            rule,
            format!("background not in Delta: {}", class.diagnostic.unwrap_or_default()),
        ));
    }
    let d_event = d.event(n)?;
    for (label, target) in [
        (format!("F_{a}"), Proposition::f(a)),
        (format!("G_{a}"), Proposition::g(a)),
        (format!("G_{b}"), Proposition::g(b)),
    ] {
        if determines(m, &d_event, &target.event(n)?) {
            return Ok(GuardedResult::premise_failed(rule, format!("background determines {label}")));
        }
    }
    let g_b = Proposition::g(b).event(n)?;
    let fg_a = Proposition::fg(a).event(n)?;
    let fb_d = Proposition::f(b).event(n)?.intersection(&d_event);
    let cmp = Comparison::new(m, &g_b, &fg_a, &fb_d);
    if !cmp.defined() {
        return Ok(GuardedResult::premise_failed(rule, "conditional undefined"));
    }
    let mut r = GuardedResult::new(rule).with_values(cmp.lhs(), cmp.rhs());
    r.premise = true;
    r.instances = 1;
    r.conclusion = Conclusion::from_bool(cmp.ordering() == Ordering::Greater);
    Ok(r)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct XiFactors {
    #[serde(serialize_with = "rational::serialize_rational", deserialize_with = "rational::deserialize_rational")]
    pub xi1: Rational,
    #[serde(serialize_with = "rational::serialize_rational", deserialize_with = "rational::deserialize_rational")]
    pub xi2: Rational,
    #[serde(serialize_with = "rational::serialize_rational", deserialize_with = "rational::deserialize_rational")]
    pub product: Rational,
}

/// Ξ₁ = pr(X | FG_a·D) / pr(X | D) and Ξ₂ = 1 / pr(F→G_a | X·D), where X
/// says every object outside inds_D ∪ {a} is F→G.
pub fn xi_factors(m: &Measure, d: &Proposition, a: usize) -> Result<XiFactors, RuleError> {
    check_object(m, a)?;
    let n = m.universe_size();
    let class = classify_background(d, n)?;
    if !class.is_small_delta() {
        return Err(RuleError::BackgroundFamily(
            "the factorization needs complete descriptions that do not refute H".into(),
        ));
    }
    let inds = class.inds();
    if inds.contains(&a) {
        return Err(RuleError::InvalidArgument(format!("object {a} is described by the background")));
    }
    let d_event = d.event(n)?;
    let others = (1..=n).filter(|b| *b != a && !inds.contains(b));
    let x = Proposition::each(CategorySet::F_IMPLIES_G, others).event(n)?;
    let fg_a = Proposition::fg(a).event(n)?;
    let undefined = |what: &str| RuleError::Undefined(what.to_string());
    let with_e = m
        .conditional(&x, &fg_a.intersection(&d_event))
        .map_err(|_| undefined("pr(FG_a·D) = 0"))?;
    let without = m.conditional(&x, &d_event).map_err(|_| undefined("pr(D) = 0"))?;
    if without.is_zero() {
        return Err(undefined("pr(X | D) = 0"));
    }
    let fi_a = Proposition::f_implies_g(a).event(n)?;
    let inner = m
        .conditional(&fi_a, &x.intersection(&d_event))
        .map_err(|_| undefined("pr(X·D) = 0"))?;
    if inner.is_zero() {
        return Err(undefined("pr(F>G_a | X·D) = 0"));
    }
    let xi1 = with_e / without;
    let xi2 = Rational::one() / inner;
    Ok(XiFactors {
        product: &xi1 * &xi2,
        xi1,
        xi2,
    })
}

/// pr(¬ψ_a | ψ on the first n objects other than a), n = 0..N−1. Undefined
/// entries are `None`.
pub fn gaifman_trend(m: &Measure, psi: CategorySet, a: usize) -> Result<Vec<Option<Rational>>, RuleError> {
    check_object(m, a)?;
    let n = m.universe_size();
    let not_psi_a = Proposition::atom(a, psi.complement()).event(n)?;
    let others: Vec<usize> = (1..=n).filter(|b| *b != a).collect();
    (0..n)
        .map(|count| {
            let given = Proposition::each(psi, others[..count].iter().copied()).event(n)?;
            Ok(conditional_or_none(m, &not_psi_a, &given))
        })
        .collect()
}

/// One observation category on object `a` as a proposition.
pub(crate) fn observation(a: usize, q: QCategory) -> Proposition {
    Proposition::category(a, q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{carnap_measure, iid_product_measure, uniform_measure, CategoryPrior};
    use crate::rational::ratio;

    #[test]
    fn uniform_nc_and_refutation() {
        let m = uniform_measure(2).unwrap();
        let v = confirmation_verdict(&m, &Proposition::H, &Proposition::fg(1), &Proposition::top()).unwrap();
        assert_eq!(v.relation, Relation::Confirms);
        assert_eq!((v.lhs.unwrap(), v.rhs.unwrap()), (ratio(3, 4), ratio(9, 16)));
        let v = confirmation_verdict(&m, &Proposition::H, &Proposition::f_not_g(1), &Proposition::top()).unwrap();
        assert_eq!(v.relation, Relation::Refutes);
        let v = confirmation_verdict(&m, &Proposition::H, &Proposition::fg(1), &Proposition::bottom()).unwrap();
        assert_eq!(v.relation, Relation::Undefined);
    }

    #[test]
    fn pj_examples() {
        let u = uniform_measure(2).unwrap();
        let r = check_pj(&u, CategorySet::single(QCategory::Q2), 1, 2, &Proposition::top(), PjMode::Weak).unwrap();
        assert!(r.premise && r.conclusion == Conclusion::Holds);
        assert_eq!(r.lhs, r.rhs);
        let c = carnap_measure(2, &ratio(2, 1), &CategoryPrior::uniform()).unwrap();
        let r = check_pj(&c, CategorySet::single(QCategory::Q1), 1, 2, &Proposition::top(), PjMode::Strong).unwrap();
        assert_eq!(r.conclusion, Conclusion::Holds);
        assert_eq!((r.lhs.unwrap(), r.rhs.unwrap()), (ratio(1, 2), ratio(1, 4)));
        let same = check_pj(&c, CategorySet::F, 1, 1, &Proposition::top(), PjMode::Weak).unwrap();
        assert_eq!(same.conclusion, Conclusion::NotEvaluated);
        let det = check_pj(&c, CategorySet::F, 1, 2, &Proposition::f(2), PjMode::Weak).unwrap();
        assert!(!det.premise);
    }

    #[test]
    fn ra_examples() {
        let c = carnap_measure(2, &ratio(2, 1), &CategoryPrior::uniform()).unwrap();
        assert_eq!(check_ra(&c, 1, 2, &Proposition::top()).unwrap().conclusion, Conclusion::Holds);
        let u = uniform_measure(2).unwrap();
        assert_eq!(check_ra(&u, 1, 2, &Proposition::top()).unwrap().conclusion, Conclusion::Fails);
    }

    #[test]
    fn xi_uniform_two_objects() {
        let m = uniform_measure(2).unwrap();
        let xi = xi_factors(&m, &Proposition::top(), 1).unwrap();
        assert_eq!((xi.xi1, xi.xi2.clone(), xi.product), (ratio(1, 1), ratio(4, 3), ratio(4, 3)));
        let one = uniform_measure(1).unwrap();
        assert_eq!(xi_factors(&one, &Proposition::top(), 1).unwrap().xi1, ratio(1, 1));
        assert!(xi_factors(&m, &Proposition::f(2), 1).is_err());
    }

    #[test]
    fn trends() {
        let u = uniform_measure(4).unwrap();
        let t = gaifman_trend(&u, CategorySet::F_IMPLIES_G, 1).unwrap();
        assert!(t.iter().all(|x| x.as_ref() == Some(&ratio(1, 4))));
        let c = carnap_measure(4, &ratio(2, 1), &CategoryPrior::uniform()).unwrap();
        let t: Vec<Rational> = gaifman_trend(&c, CategorySet::F_IMPLIES_G, 1).unwrap().into_iter().flatten().collect();
        assert!(t.windows(2).all(|w| w[1] < w[0]));
        let theta = CategoryPrior::new([ratio(1, 2), ratio(1, 8), ratio(1, 8), ratio(1, 4)]).unwrap();
        let i = iid_product_measure(3, &theta).unwrap();
        let t = gaifman_trend(&i, CategorySet::F_IMPLIES_G, 2).unwrap();
        assert!(t.iter().all(|x| x.as_ref() == Some(&ratio(1, 8))));
    }
}
