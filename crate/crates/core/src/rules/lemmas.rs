//! Executable forms of the auxiliary lemmas behind the Setting-2 proofs.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::{conditional_or_none, Comparison, Conclusion, GuardedResult, RuleError};
use crate::measures::Measure;
use crate::model::{
    combinations, exact_event, permute_proposition, z_event, z_proposition, Background, CategorySet, Event,
    Permutation, Proposition,
};
use crate::prop_lang;
use crate::rational::{self, ratio, Rational};

/// Group PJ: if PJ(ψ, a, b, D·ψ_S) holds for every b ∈ T and S ⊆ T∖{b},
/// then pr(ψ_T | ψ_a·D) ≥ pr(ψ_T | D). With `negative`, the premise uses
/// ¬ψ and the conclusion reads pr(ψ_T | ¬ψ_a·D) ≤ pr(ψ_T | D).
pub fn group_pj_check(
    m: &Measure,
    psi: CategorySet,
    a: usize,
    targets: &[usize],
    d: &Background,
    negative: bool,
) -> Result<GuardedResult, RuleError> {
    let n = m.universe_size();
    for &b in targets.iter().chain(std::iter::once(&a)) {
        if b == 0 || b > n {
            return Err(RuleError::InvalidArgument(format!("object {b} outside 1..={n}")));
        }
        if d.mentions(b) {
            return Err(RuleError::BackgroundFamily(format!("background mentions object {b}")));
        }
    }
    if targets.contains(&a) {
        return Err(RuleError::InvalidArgument(format!("object {a} is among the targets")));
    }
    let rule = format!(
        "group-PJ({}{psi}, a={a}, T={targets:?}, D={})",
        if negative { "not " } else { "" },
        prop_lang::format(&d.to_proposition())
    );
    let premise_psi = if negative { psi.complement() } else { psi };
    let d_event = d.event(n)?;
    let premise_a = Proposition::atom(a, premise_psi).event(n)?;
    let mut result = GuardedResult::new(rule);
    for (i, &b) in targets.iter().enumerate() {
        let others: Vec<usize> = targets.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, &c)| c).collect();
        let target_b = Proposition::atom(b, premise_psi).event(n)?;
        for mask in 0u32..(1 << others.len()) {
            let s = others.iter().enumerate().filter(|(j, _)| mask & (1 << j) != 0).map(|(_, &c)| c);
            let bg = d_event.intersection(&Proposition::each(psi, s).event(n)?);
            result.instances += 1;
            let cmp = Comparison::new(m, &target_b, &premise_a, &bg);
            if !cmp.defined() || cmp.ordering() == Ordering::Less {
                result.witnesses.push(format!("PJ fails at b={b}, S mask {mask:#b}"));
                return Ok(result);
            }
        }
    }
    result.premise = true;
    let psi_t = Proposition::each(psi, targets.iter().copied()).event(n)?;
    let psi_a = Proposition::atom(a, psi).event(n)?;
    let given = if negative { psi_a.complement() } else { psi_a };
    let cmp = Comparison::new(m, &psi_t, &given, &d_event);
    if !cmp.defined() {
        result.witnesses.push("conclusion undefined".into());
        return Ok(result);
    }
    let holds = if negative {
        cmp.ordering() != Ordering::Greater
    } else {
        cmp.ordering() != Ordering::Less
    };
    result.conclusion = Conclusion::from_bool(holds);
    Ok(result.with_values(cmp.lhs(), cmp.rhs()))
}

/// pr(H | E·D) − pr(G_{1:k} | E·D) for D = F_{1:k}·¬F_{k+1:N}; zero
/// whenever defined. `None` when E·D has probability zero.
pub fn lemma2_residual(m: &Measure, k: usize, e: &Event) -> Result<Option<Rational>, RuleError> {
    let n = m.universe_size();
    if k == 0 || k > n {
        return Err(RuleError::InvalidArgument(format!("k={k} outside 1..={n}")));
    }
    let d = super::setting2::named_background(k, n)?;
    let ed = e.intersection(&d);
    let h = Proposition::H.event(n)?;
    let g = Proposition::range(CategorySet::G, 1, k).event(n)?;
    Ok(conditional_or_none(m, &h, &ed).zip(conditional_or_none(m, &g, &ed)).map(|(x, y)| x - y))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypergeometricReport {
    /// pr(F_b | F_a·Exact(k)) and its expected value (k−1)/(N−1).
    #[serde(serialize_with = "rational::serialize_opt_rational", deserialize_with = "rational::deserialize_opt_rational")]
    pub given_f_a: Option<Rational>,
    #[serde(serialize_with = "rational::serialize_rational", deserialize_with = "rational::deserialize_rational")]
    pub expected_given_f_a: Rational,
    /// pr(F_b | Exact(k)) and its expected value k/N.
    #[serde(serialize_with = "rational::serialize_opt_rational", deserialize_with = "rational::deserialize_opt_rational")]
    pub plain: Option<Rational>,
    #[serde(serialize_with = "rational::serialize_rational", deserialize_with = "rational::deserialize_rational")]
    pub expected_plain: Rational,
    pub holds: bool,
}

/// Under exchangeability, F_b given Exact(k) behaves like drawing without
/// replacement.
pub fn hypergeometric_check(m: &Measure, k: usize, a: usize, b: usize) -> Result<HypergeometricReport, RuleError> {
    let n = m.universe_size();
    if n < 2 || k == 0 || k > n || a == b || a == 0 || b == 0 || a > n || b > n {
        return Err(RuleError::InvalidArgument(format!("need distinct objects in 1..={n} and 1 <= k <= N")));
    }
    let exact = exact_event(k, n)?;
    let f_a = Proposition::f(a).event(n)?;
    let f_b = Proposition::f(b).event(n)?;
    let given_f_a = conditional_or_none(m, &f_b, &f_a.intersection(&exact));
    let plain = conditional_or_none(m, &f_b, &exact);
    let expected_given_f_a = ratio(k as i64 - 1, n as i64 - 1);
    let expected_plain = ratio(k as i64, n as i64);
    let holds = given_f_a.as_ref() == Some(&expected_given_f_a) && plain.as_ref() == Some(&expected_plain);
    Ok(HypergeometricReport {
        given_f_a,
        expected_given_f_a,
        plain,
        expected_plain,
        holds,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermutationSuiteReport {
    pub n: usize,
    pub checks: usize,
    pub failures: Vec<String>,
}

impl PermutationSuiteReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// For every π of {1..N}: H and Exact(k) are invariant, Z_C maps to Z_{π(C)},
/// and permuting a proposition's objects permutes its event.
pub fn permutation_lemma_suite(n: usize) -> Result<PermutationSuiteReport, RuleError> {
    if n == 0 || n > 4 {
        return Err(RuleError::InvalidArgument("the permutation suite runs for 1 <= N <= 4".into()));
    }
    let h = Proposition::H.event(n)?;
    let exacts: Vec<Event> = (0..=n).map(|k| exact_event(k, n)).collect::<Result<_, _>>()?;
    let samples = [
        Proposition::fg(1),
        Proposition::f(1).and(Proposition::not_g(n)),
        Proposition::implies(Proposition::g(1), Proposition::f(n)),
        Proposition::range(CategorySet::F_IMPLIES_G, 1, n),
        Proposition::Exact(n / 2).and(Proposition::g(1)),
    ];
    let mut report = PermutationSuiteReport {
        n,
        checks: 0,
        failures: Vec::new(),
    };
    let mut check = |ok: bool, what: String| {
        report.checks += 1;
        if !ok {
            report.failures.push(what);
        }
    };
    for pi in Permutation::all(n) {
        check(pi.apply_to_event(&h) == h, format!("H not invariant under {pi}"));
        for (k, e) in exacts.iter().enumerate() {
            check(pi.apply_to_event(e) == *e, format!("Exact({k}) not invariant under {pi}"));
        }
        for k in 0..=n {
            for c in combinations(n, k)? {
                let image = pi.apply_to_event(&z_event(&c, n)?);
                check(
                    image == z_event(&pi.apply_to_set(&c), n)?,
                    format!("Z_{c:?} does not map to Z_pi(C) under {pi}"),
                );
                let permuted = permute_proposition(&z_proposition(&c, n), &pi)?;
                check(permuted.event(n)? == image, format!("Z-proposition {c:?} under {pi}"));
            }
        }
        for p in &samples {
            let permuted = permute_proposition(p, &pi)?;
            check(
                permuted.event(n)? == pi.apply_to_event(&p.event(n)?),
                format!("{} under {pi}", prop_lang::format(p)),
            );
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Example7Report {
    /// pr(Exact(2)·F3·G3 | H) against 2·pr(F1·F2·¬F3·G2 | H).
    #[serde(serialize_with = "rational::serialize_opt_rational", deserialize_with = "rational::deserialize_opt_rational")]
    pub conditional_lhs: Option<Rational>,
    #[serde(serialize_with = "rational::serialize_opt_rational", deserialize_with = "rational::deserialize_opt_rational")]
    pub conditional_rhs: Option<Rational>,
    /// The same identity without conditioning on H.
    #[serde(serialize_with = "rational::serialize_rational", deserialize_with = "rational::deserialize_rational")]
    pub joint_lhs: Rational,
    #[serde(serialize_with = "rational::serialize_rational", deserialize_with = "rational::deserialize_rational")]
    pub joint_rhs: Rational,
    pub holds: bool,
}

/// The N = 3 symmetry identity: Exact(2)·F3·G3 splits into two Z-cells that
/// an exchangeable measure weighs equally.
pub fn example7_identity(m: &Measure) -> Result<Example7Report, RuleError> {
    let n = m.universe_size();
    if n != 3 {
        return Err(RuleError::InvalidArgument(format!("the identity is stated for N = 3, got {n}")));
    }
    let h = Proposition::H.event(n)?;
    let lhs_event = Proposition::Exact(2).and(Proposition::fg(3)).event(n)?;
    let rhs_event = Proposition::f(1)
        .and(Proposition::f(2))
        .and(Proposition::not_f(3))
        .and(Proposition::g(2))
        .event(n)?;
    let two = ratio(2, 1);
    let conditional_lhs = conditional_or_none(m, &lhs_event, &h);
    let conditional_rhs = conditional_or_none(m, &rhs_event, &h).map(|r| &two * r);
    let joint_lhs = m.probability(&lhs_event)?;
    let joint_rhs = &two * m.probability(&rhs_event)?;
    let holds = conditional_lhs == conditional_rhs && joint_lhs == joint_rhs;
    Ok(Example7Report {
        conditional_lhs,
        conditional_rhs,
        joint_lhs,
        joint_rhs,
        holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{carnap_measure, random_exchangeable_measure, random_measure, uniform_measure, CategoryPrior};

    #[test]
    fn hypergeometric_under_exchangeability() {
        let m = random_exchangeable_measure(4, 3).unwrap();
        for k in 1..=4 {
            assert!(hypergeometric_check(&m, k, 1, 3).unwrap().holds);
        }
    }

    #[test]
    fn permutation_suite_passes() {
        for n in 1..=4 {
            let r = permutation_lemma_suite(n).unwrap();
            assert!(r.passed(), "{:?}", r.failures);
            assert!(r.checks > 0);
        }
    }

    #[test]
    fn example7_needs_exchangeability() {
        assert!(example7_identity(&uniform_measure(3).unwrap()).unwrap().holds);
        assert!(example7_identity(&random_exchangeable_measure(3, 9).unwrap()).unwrap().holds);
        assert!(!example7_identity(&random_measure(3, 9).unwrap()).unwrap().holds);
    }

    #[test]
    fn lemma2_vanishes() {
        let m = random_measure(3, 5).unwrap();
        let e = Proposition::g(3).event(3).unwrap();
        for k in 1..=3 {
            assert_eq!(lemma2_residual(&m, k, &e).unwrap(), Some(ratio(0, 1)));
        }
    }

    #[test]
    fn group_pj_for_carnap() {
        let m = carnap_measure(4, &ratio(2, 1), &CategoryPrior::uniform()).unwrap();
        let d = Background::from_constraints([(4, CategorySet::F)]);
        let r = group_pj_check(&m, CategorySet::G, 1, &[2, 3], &d, false).unwrap();
        assert!(r.premise && r.conclusion == Conclusion::Holds, "{r}");
        let r = group_pj_check(&m, CategorySet::G, 1, &[2, 3], &d, true).unwrap();
        assert!(r.premise && r.conclusion == Conclusion::Holds, "{r}");
    }
}
