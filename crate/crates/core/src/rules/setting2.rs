//! Setting 2: the number of F-objects is known.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::checks::{observation, verdict_for_events};
use super::setting1::PremiseCheck;
use super::{conditional_or_none, exact_and_approx, Comparison, Conclusion, GuardedResult, Relation, RuleError, Verdict};
use crate::measures::{Measure, Provenance};
use crate::model::{exact_event, CategorySet, Event, Proposition, QCategory};
use crate::rational::{self, Rational};

fn check_k(n: usize, k: usize) -> Result<(), RuleError> {
    if k == 0 || k > n {
        return Err(RuleError::InvalidArgument(format!("k={k} outside 1..={n}")));
    }
    Ok(())
}

fn check_object(n: usize, a: usize) -> Result<(), RuleError> {
    if a == 0 || a > n {
        return Err(RuleError::InvalidArgument(format!("object {a} outside 1..={n}")));
    }
    Ok(())
}

/// F_{1:k}·¬F_{k+1:N}.
pub(crate) fn named_background(k: usize, n: usize) -> Result<Event, RuleError> {
    Ok(Proposition::range(CategorySet::F, 1, k)
        .and(Proposition::range(CategorySet::NOT_F, k + 1, n))
        .event(n)?)
}

fn event(p: Proposition, n: usize) -> Result<Event, RuleError> {
    Ok(p.event(n)?)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Theorem4Residuals {
    /// pr(H | Exact(k)) − pr(H | D).
    #[serde(serialize_with = "rational::serialize_opt_rational", deserialize_with = "rational::deserialize_opt_rational")]
    pub plain: Option<Rational>,
    /// pr(H | Exact(k)·F_a·G_a) − pr(H | D·G_k).
    #[serde(serialize_with = "rational::serialize_opt_rational", deserialize_with = "rational::deserialize_opt_rational")]
    pub f_g: Option<Rational>,
    /// pr(H | Exact(k)·¬F_a·G_a) − pr(H | D·G_N).
    #[serde(serialize_with = "rational::serialize_opt_rational", deserialize_with = "rational::deserialize_opt_rational")]
    pub nf_g: Option<Rational>,
    /// pr(H | Exact(k)·¬F_a·¬G_a) − pr(H | D·¬G_N).
    #[serde(serialize_with = "rational::serialize_opt_rational", deserialize_with = "rational::deserialize_opt_rational")]
    pub nf_ng: Option<Rational>,
}

impl Theorem4Residuals {
    pub fn entries(&self) -> [(&'static str, &Option<Rational>); 4] {
        [
            ("plain", &self.plain),
            ("FG_a", &self.f_g),
            ("nFG_a", &self.nf_g),
            ("nFnG_a", &self.nf_ng),
        ]
    }

    /// Every defined residual is exactly zero.
    pub fn all_zero(&self) -> bool {
        self.entries()
            .iter()
            .all(|(_, r)| r.as_ref().is_none_or(|r| *r == Rational::from_integer(0.into())))
    }
}

/// Residuals of the four Exact(k) ↔ named-objects equalities. Entries whose
/// conditionals are undefined (for example ¬F_a when k = N) are `None`.
pub fn theorem4_residuals(m: &Measure, k: usize, a: usize) -> Result<Theorem4Residuals, RuleError> {
    let n = m.universe_size();
    check_k(n, k)?;
    check_object(n, a)?;
    let h = event(Proposition::H, n)?;
    let exact = exact_event(k, n)?;
    let d = named_background(k, n)?;
    let residual = |left: &Event, right: &Event| -> Option<Rational> {
        Some(conditional_or_none(m, &h, left)? - conditional_or_none(m, &h, right)?)
    };
    let obs = |q: QCategory| event(observation(a, q), n);
    let nf_a_g = obs(QCategory::Q3)?;
    let nf_a_ng = obs(QCategory::Q4)?;
    Ok(Theorem4Residuals {
        plain: residual(&exact, &d),
        f_g: residual(
            &exact.intersection(&obs(QCategory::Q1)?),
            &d.intersection(&event(Proposition::g(k), n)?),
        ),
        nf_g: residual(&exact.intersection(&nf_a_g), &d.intersection(&event(Proposition::g(n), n)?)),
        nf_ng: residual(&exact.intersection(&nf_a_ng), &d.intersection(&event(Proposition::not_g(n), n)?)),
    })
}

/// The PJ instances the Setting-2 proofs rely on: for ψ ∈ {G, ¬G}, all
/// a ≠ b and every S ⊆ U∖{a,b}, pr(ψ_b | ψ_a·D·G_S) ≥ pr(ψ_b | D·G_S)
/// with D = F_{1:k}·¬F_{k+1:N}; plus regularity.
pub fn theorem3_pj_guard(m: &Measure, k: usize) -> Result<PremiseCheck, RuleError> {
    let n = m.universe_size();
    check_k(n, k)?;
    if !m.is_regular() {
        return Ok(PremiseCheck::failed(0, "measure is not regular".into(), None));
    }
    let d = named_background(k, n)?;
    let mut instances = 0;
    for psi in [CategorySet::G, CategorySet::NOT_G] {
        for a in 1..=n {
            for b in (1..=n).filter(|&b| b != a) {
                let rest: Vec<usize> = (1..=n).filter(|&c| c != a && c != b).collect();
                let psi_a = event(Proposition::atom(a, psi), n)?;
                let psi_b = event(Proposition::atom(b, psi), n)?;
                for mask in 0u32..(1 << rest.len()) {
                    let s: Vec<usize> = rest
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| mask & (1 << i) != 0)
                        .map(|(_, &c)| c)
                        .collect();
                    let bg = d.intersection(&event(Proposition::each(CategorySet::G, s.iter().copied()), n)?);
                    instances += 1;
                    let cmp = Comparison::new(m, &psi_b, &psi_a, &bg);
                    if cmp.ordering() == Ordering::Less {
                        return Ok(PremiseCheck::failed(
                            instances,
                            format!("PJ({psi}) fails at a={a}, b={b}, S={s:?}"),
                            Some((cmp.lhs(), cmp.rhs())),
                        ));
                    }
                }
            }
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

/// The raw analogy inequalities used in the RA branch of the proof:
/// pr(G_i | F_i·FG_k·G_{1:i−1}·D) > pr(G_i | F_i·G_{1:i−1}·D) for i < k;
/// plus regularity. The proof applies RA although D fixes F_i and F_k, so
/// the "does not determine F_a" precondition is not imposed here.
pub fn theorem3_ra_guard(m: &Measure, k: usize) -> Result<PremiseCheck, RuleError> {
    let n = m.universe_size();
    check_k(n, k)?;
    if !m.is_regular() {
        return Ok(PremiseCheck::failed(0, "measure is not regular".into(), None));
    }
    let d = named_background(k, n)?;
    let fg_k = event(Proposition::fg(k), n)?;
    for i in 1..k {
        let bg = d
            .intersection(&event(Proposition::f(i), n)?)
            .intersection(&event(Proposition::range(CategorySet::G, 1, i - 1), n)?);
        let cmp = Comparison::new(m, &event(Proposition::g(i), n)?, &fg_k, &bg);
        if cmp.ordering() != Ordering::Greater {
            return Ok(PremiseCheck::failed(
                i,
                format!("RA fails at a={k}, b={i}"),
                Some((cmp.lhs(), cmp.rhs())),
            ));
        }
    }
    Ok(PremiseCheck {
        holds: true,
        instances: k - 1,
        witness: None,
        lhs: None,
        rhs: None,
    })
}

struct Inequality {
    label: String,
    lhs: Option<Rational>,
    rhs: Option<Rational>,
    want: fn(Ordering) -> bool,
}

fn inequality(m: &Measure, label: String, h: &Event, with: &Event, without: &Event, want: fn(Ordering) -> bool) -> Inequality {
    Inequality {
        label,
        lhs: conditional_or_none(m, h, with),
        rhs: conditional_or_none(m, h, without),
        want,
    }
}

fn greater(o: Ordering) -> bool {
    o == Ordering::Greater
}
fn at_least(o: Ordering) -> bool {
    o != Ordering::Less
}
fn at_most(o: Ordering) -> bool {
    o != Ordering::Greater
}

/// Evaluates inequalities into a guarded result. Instances with undefined
/// conditionals are skipped.
fn conclude(mut result: GuardedResult, checks: Vec<Inequality>) -> GuardedResult {
    let mut holds = true;
    for c in checks {
        let (Some(l), Some(r)) = (c.lhs, c.rhs) else { continue };
        result.instances += 1;
        if !(c.want)(l.cmp(&r)) {
            holds = false;
            result
                .witnesses
                .push(format!("{} fails: {} vs {}", c.label, exact_and_approx(&l), exact_and_approx(&r)));
        }
        if result.lhs.is_none() {
            result.lhs = Some(l);
            result.rhs = Some(r);
        }
    }
    result.conclusion = Conclusion::from_bool(holds);
    result
}

fn guarded(rule: String, premise: &PremiseCheck, extra: Option<&str>) -> GuardedResult {
    let mut r = GuardedResult::new(rule);
    r.instances = premise.instances;
    if let Some(reason) = extra {
        r.witnesses.push(reason.to_string());
    } else if !premise.holds {
        r.witnesses.extend(premise.witness.clone());
    } else {
        r.premise = true;
    }
    r
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Setting2Report {
    pub n: usize,
    pub k: usize,
    pub a: usize,
    pub residuals: Option<Theorem4Residuals>,
    pub theorem4: GuardedResult,
    pub theorem3_pj: GuardedResult,
    pub theorem3_ra: GuardedResult,
    pub theorem5_pj: GuardedResult,
    pub theorem5_ra: GuardedResult,
}

impl Setting2Report {
    pub fn results(&self) -> [&GuardedResult; 5] {
        [&self.theorem4, &self.theorem3_pj, &self.theorem3_ra, &self.theorem5_pj, &self.theorem5_ra]
    }

    pub fn violations(&self) -> usize {
        self.results().iter().filter(|r| r.is_violation()).count()
    }
}

/// Theorem 4 equalities (under exchangeability), the Theorem 3 inequalities
/// for the named-objects background and the Theorem 5 inequalities for
/// Exact(k), each guarded by its PJ or RA premise.
pub fn setting2_checks(m: &Measure, k: usize, a: usize) -> Result<Setting2Report, RuleError> {
    let n = m.universe_size();
    check_k(n, k)?;
    check_object(n, a)?;
    let exchangeable = m.is_exchangeable();
    let h = event(Proposition::H, n)?;
    let d = named_background(k, n)?;
    let exact = exact_event(k, n)?;

    let mut theorem4 = GuardedResult::new(format!("theorem4(k={k}, a={a})"));
    let residuals = if exchangeable {
        let res = theorem4_residuals(m, k, a)?;
        theorem4.premise = true;
        for (label, r) in res.entries() {
            if let Some(r) = r {
                theorem4.instances += 1;
                if *r != Rational::from_integer(0.into()) {
                    theorem4.witnesses.push(format!("residual {label} = {}", exact_and_approx(r)));
                }
            }
        }
        theorem4.conclusion = Conclusion::from_bool(theorem4.witnesses.is_empty());
        Some(res)
    } else {
        theorem4.witnesses.push("measure is not exchangeable".into());
        None
    };

    let g = |b: usize| event(Proposition::g(b), n);
    let not_g = |b: usize| event(Proposition::not_g(b), n);
    let named = |ineqs: bool| -> Result<Vec<Inequality>, RuleError> {
        let mut v = vec![inequality(m, format!("pr(H|G_{k}.D) > pr(H|D)"), &h, &g(k)?.intersection(&d), &d, greater)];
        if ineqs {
            v.push(inequality(m, format!("pr(H|G_{n}.D) >= pr(H|D)"), &h, &g(n)?.intersection(&d), &d, at_least));
            v.push(inequality(m, format!("pr(H|~G_{n}.D) <= pr(H|D)"), &h, &not_g(n)?.intersection(&d), &d, at_most));
        }
        Ok(v)
    };
    let obs = |q: QCategory| -> Result<Event, RuleError> { Ok(exact.intersection(&event(observation(a, q), n)?)) };
    let exact_form = |ineqs: bool| -> Result<Vec<Inequality>, RuleError> {
        let mut v = vec![inequality(m, format!("pr(H|Exact({k}).FG_{a}) > pr(H|Exact({k}))"), &h, &obs(QCategory::Q1)?, &exact, greater)];
        if ineqs {
            v.push(inequality(m, format!("pr(H|Exact({k}).nFG_{a}) >= pr(H|Exact({k}))"), &h, &obs(QCategory::Q3)?, &exact, at_least));
            v.push(inequality(m, format!("pr(H|Exact({k}).nFnG_{a}) <= pr(H|Exact({k}))"), &h, &obs(QCategory::Q4)?, &exact, at_most));
        }
        Ok(v)
    };

    let pj = theorem3_pj_guard(m, k)?;
    let ra = theorem3_ra_guard(m, k)?;
    let not_exch = (!exchangeable).then_some("measure is not exchangeable");

    let mut theorem3_pj = guarded(format!("theorem3-pj(k={k})"), &pj, None);
    if theorem3_pj.premise {
        theorem3_pj = conclude(theorem3_pj, named(true)?);
    }
    let mut theorem3_ra = guarded(format!("theorem3-ra(k={k})"), &ra, None);
    if theorem3_ra.premise {
        theorem3_ra = conclude(theorem3_ra, named(false)?);
    }
    let mut theorem5_pj = guarded(format!("theorem5-pj(k={k}, a={a})"), &pj, not_exch);
    if theorem5_pj.premise {
        theorem5_pj = conclude(theorem5_pj, exact_form(true)?);
    }
    let mut theorem5_ra = guarded(format!("theorem5-ra(k={k}, a={a})"), &ra, not_exch);
    if theorem5_ra.premise {
        theorem5_ra = conclude(theorem5_ra, exact_form(false)?);
    }
    Ok(Setting2Report {
        n,
        k,
        a,
        residuals,
        theorem4,
        theorem3_pj,
        theorem3_ra,
        theorem5_pj,
        theorem5_ra,
    })
}

/// Relabeling for the role swap F′ := ¬G, G′ := ¬F, indexed by category
/// code: FG ↔ nFnG, while FnG and nFG stay put.
pub fn category_role_swap() -> [QCategory; 4] {
    let mut map = [QCategory::Q4; 4];
    for q in QCategory::ALL {
        let swapped = QCategory::from_predicates(!q.is_g(), !q.is_f());
        map[q.code() as usize] = swapped;
    }
    map
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PjExpectation {
    Confirms,
    DoesNotConfirm,
    DoesNotDisconfirm,
    Refutes,
}

impl PjExpectation {
    pub fn matches(self, relation: Relation) -> bool {
        match self {
            PjExpectation::Confirms => relation == Relation::Confirms,
            PjExpectation::DoesNotConfirm => matches!(relation, Relation::Neutral | Relation::Disconfirms),
            PjExpectation::DoesNotDisconfirm => matches!(relation, Relation::Neutral | Relation::Confirms),
            PjExpectation::Refutes => relation == Relation::Refutes,
        }
    }
}

impl fmt::Display for PjExpectation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PjExpectation::Confirms => "confirms",
            PjExpectation::DoesNotConfirm => "does not confirm",
            PjExpectation::DoesNotDisconfirm => "does not disconfirm",
            PjExpectation::Refutes => "refutes",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Table1Cell {
    pub verdict: Verdict,
    pub pj_expectation: PjExpectation,
    pub pj_matches: bool,
    /// What NC would assert for this observation ("n/a" where it is silent).
    pub nc: String,
    pub ra: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Table1Row {
    pub observation: QCategory,
    pub label: String,
    pub ravens_known: Table1Cell,
    pub non_blacks_known: Table1Cell,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Table1 {
    pub n: usize,
    pub k: usize,
    pub a: usize,
    /// PJ guard (with regularity) for the original and the role-swapped measure.
    pub pj_guard_ravens: bool,
    pub pj_guard_non_blacks: bool,
    pub rows: Vec<Table1Row>,
}

impl Table1 {
    /// Every PJ cell agrees with its expected placement.
    pub fn pattern_matches(&self) -> bool {
        self.rows
            .iter()
            .all(|r| r.ravens_known.pj_matches && r.non_blacks_known.pj_matches)
    }

    /// A guard that holds while its column's pattern fails.
    pub fn violations(&self) -> usize {
        let col = |guard: bool, pick: fn(&Table1Row) -> &Table1Cell| {
            usize::from(guard && !self.rows.iter().all(|r| pick(r).pj_matches))
        };
        col(self.pj_guard_ravens, |r| &r.ravens_known) + col(self.pj_guard_non_blacks, |r| &r.non_blacks_known)
    }
}

impl fmt::Display for Table1 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "Table 1 (N={}, k={}, a={}); PJ guard: ravens {}, non-blacks {}",
            self.n,
            self.k,
            self.a,
            if self.pj_guard_ravens { "holds" } else { "fails" },
            if self.pj_guard_non_blacks { "holds" } else { "fails" }
        )?;
        for row in &self.rows {
            writeln!(f, "{} ({}):", row.label, row.observation.name())?;
            for (col, cell) in [("no. of ravens known", &row.ravens_known), ("no. of non-blacks known", &row.non_blacks_known)] {
                writeln!(
                    f,
                    "  {col}: {} | PJ expects {} [{}] | NC: {} | RA: {}",
                    cell.verdict,
                    cell.pj_expectation,
                    if cell.pj_matches { "match" } else { "MISMATCH" },
                    cell.nc,
                    cell.ra
                )?;
            }
        }
        Ok(())
    }
}

fn row_label(q: QCategory) -> &'static str {
    match q {
        QCategory::Q4 => "observation of a non-black non-raven",
        QCategory::Q2 => "observation of a non-black raven",
        QCategory::Q3 => "observation of a black non-raven",
        QCategory::Q1 => "observation of a black raven",
    }
}

/// The 4×2 matrix: rows are observation categories of object `a`
/// (F = raven, G = black); the first column conditions on Exact(k) for F,
/// the second on Exact(k) for F′ = non-black via the role-swapped measure.
pub fn table1_matrix(m: &Measure, k: usize, a: usize) -> Result<Table1, RuleError> {
    let n = m.universe_size();
    check_k(n, k)?;
    check_object(n, a)?;
    if !m.is_exchangeable() {
        return Err(RuleError::NotExchangeable);
    }
    let swap = category_role_swap();
    let swapped = m.relabel(swap, Provenance::RoleSwapped(Box::new(m.provenance().clone())));
    let h = event(Proposition::H, n)?;
    let exact = exact_event(k, n)?;
    let pj_guard_ravens = theorem3_pj_guard(m, k)?.holds;
    let pj_guard_non_blacks = theorem3_pj_guard(&swapped, k)?.holds;
    let cell = |measure: &Measure, q: QCategory, expectation: PjExpectation, nc: &str, ra: &str| -> Result<Table1Cell, RuleError> {
        let verdict = verdict_for_events(measure, &h, &event(observation(a, q), n)?, &exact);
        Ok(Table1Cell {
            pj_matches: expectation.matches(verdict.relation),
            verdict,
            pj_expectation: expectation,
            nc: nc.to_string(),
            ra: ra.to_string(),
        })
    };
    use PjExpectation::*;
    let specs = [
        (QCategory::Q4, (DoesNotConfirm, "confirms", "n/a"), (Confirms, "confirms", "confirms")),
        (QCategory::Q2, (Refutes, "n/a", "n/a"), (Refutes, "n/a", "n/a")),
        (QCategory::Q3, (DoesNotDisconfirm, "n/a", "n/a"), (DoesNotDisconfirm, "n/a", "n/a")),
        (QCategory::Q1, (Confirms, "confirms", "confirms"), (DoesNotConfirm, "confirms", "n/a")),
    ];
    let rows = specs
        .iter()
        .map(|&(q, (e1, nc1, ra1), (e2, nc2, ra2))| {
            Ok(Table1Row {
                observation: q,
                label: row_label(q).to_string(),
                ravens_known: cell(m, q, e1, nc1, ra1)?,
                non_blacks_known: cell(&swapped, swap[q.code() as usize], e2, nc2, ra2)?,
            })
        })
        .collect::<Result<Vec<_>, RuleError>>()?;
    Ok(Table1 {
        n,
        k,
        a,
        pj_guard_ravens,
        pj_guard_non_blacks,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{carnap_measure, random_measure, uniform_measure, CategoryPrior};
    use crate::rational::ratio;

    #[test]
    fn role_swap_is_an_involution() {
        let s = category_role_swap();
        assert_eq!(s[QCategory::Q1.code() as usize], QCategory::Q4);
        assert_eq!(s[QCategory::Q4.code() as usize], QCategory::Q1);
        assert_eq!(s[QCategory::Q2.code() as usize], QCategory::Q2);
        assert_eq!(s[QCategory::Q3.code() as usize], QCategory::Q3);
    }

    #[test]
    fn uniform_residuals_vanish() {
        let m = uniform_measure(3).unwrap();
        for k in 1..=3 {
            for a in 1..=3 {
                assert!(theorem4_residuals(&m, k, a).unwrap().all_zero());
            }
        }
        let r = theorem4_residuals(&m, 3, 1).unwrap();
        assert!(r.nf_g.is_none() && r.nf_ng.is_none());
    }

    #[test]
    fn non_exchangeable_skips_theorem4() {
        let m = random_measure(3, 11).unwrap();
        let rep = setting2_checks(&m, 2, 3).unwrap();
        assert_eq!(rep.theorem4.conclusion, Conclusion::NotEvaluated);
        assert!(rep.residuals.is_none());
        assert_eq!(rep.violations(), 0);
    }

    #[test]
    fn carnap_table_pattern() {
        let m = carnap_measure(4, &ratio(2, 1), &CategoryPrior::uniform()).unwrap();
        let t = table1_matrix(&m, 2, 1).unwrap();
        assert!(t.pj_guard_ravens && t.pj_guard_non_blacks);
        assert!(t.pattern_matches(), "{t}");
        assert_eq!(t.rows[1].ravens_known.verdict.relation, Relation::Refutes);
        assert_eq!(t.rows[1].non_blacks_known.verdict.relation, Relation::Refutes);
    }

    #[test]
    fn uniform_black_raven_confirms() {
        let m = uniform_measure(3).unwrap();
        let t = table1_matrix(&m, 2, 1).unwrap();
        assert_eq!(t.rows[3].ravens_known.verdict.relation, Relation::Confirms);
        assert!(table1_matrix(&random_measure(3, 1).unwrap(), 2, 1).is_err());
    }
}
