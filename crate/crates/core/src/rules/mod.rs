//! Confirmation verdicts, the inductive rules (PJ, RA, NC) and executable
//! forms of the Setting-1 and Setting-2 theorems.
//!
//! Every comparison is exact. Theorem checks return a [`GuardedResult`]: the
//! conclusion is only evaluated when the premise holds, and a violation is a
//! premise that holds together with a conclusion that fails.

mod checks;
mod lemmas;
mod setting1;
mod setting2;

pub use checks::{
    check_nc, check_nc_events, check_pj, check_ra, confirmation_verdict, gaifman_trend, verdict_for_events,
    xi_factors, PjMode, XiFactors,
};
pub use lemmas::{
    example7_identity, group_pj_check, hypergeometric_check, lemma2_residual, permutation_lemma_suite,
    Example7Report, HypergeometricReport, PermutationSuiteReport,
};
pub use setting1::{
    theorem1_premise, theorem1_sweep, theorem2_premise_check, theorem2_premise_i, theorem2_premise_ii, theorem2_sweep,
    PremiseCheck, SWEEP_CAP,
};
pub use setting2::{
    category_role_swap, setting2_checks, table1_matrix, theorem3_pj_guard, theorem3_ra_guard, theorem4_residuals, PjExpectation,
    Setting2Report, Table1, Table1Cell, Table1Row, Theorem4Residuals,
};

use std::fmt;

use num_bigint::BigUint;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::measures::{Measure, MeasureError};
use crate::model::{Event, ModelError};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error("background is not in the required family: {0}")]
    BackgroundFamily(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("undefined conditional: {0}")]
    Undefined(String),
    #[error("measure is not exchangeable")]
    NotExchangeable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Relation {
    Confirms,
    Disconfirms,
    Neutral,
    Refutes,
    Undefined,
}

impl Relation {
    /// The negation of NC's strict inequality.
    pub fn is_non_confirming(self) -> bool {
        matches!(self, Relation::Disconfirms | Relation::Neutral | Relation::Refutes)
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Confirms => "CONFIRMS",
            Relation::Disconfirms => "DISCONFIRMS",
            Relation::Neutral => "NEUTRAL",
            Relation::Refutes => "REFUTES",
            Relation::Undefined => "UNDEFINED",
        })
    }
}

/// Comparison of pr(H | E·D) (lhs) against pr(H | D) (rhs).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub relation: Relation,
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
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Verdict {
    fn undefined(note: impl Into<String>) -> Verdict {
        Verdict {
            relation: Relation::Undefined,
            lhs: None,
            rhs: None,
            note: Some(note.into()),
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.relation)?;
        if let (Some(l), Some(r)) = (&self.lhs, &self.rhs) {
            write!(f, " (lhs {} vs rhs {})", exact_and_approx(l), exact_and_approx(r))?;
        }
        if let Some(note) = &self.note {
            write!(f, " [{note}]")?;
        }
        Ok(())
    }
}

/// `3/4 (~0.75)`.
pub fn exact_and_approx(r: &Rational) -> String {
    format!("{} (~{})", rational::to_fraction_string(r), rational::decimal_string(r))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Conclusion {
    Holds,
    Fails,
    NotEvaluated,
}

impl Conclusion {
    pub fn from_bool(holds: bool) -> Conclusion {
        if holds {
            Conclusion::Holds
        } else {
            Conclusion::Fails
        }
    }
}

impl fmt::Display for Conclusion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Conclusion::Holds => "HOLDS",
            Conclusion::Fails => "FAILS",
            Conclusion::NotEvaluated => "NOT_EVALUATED",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuardedResult {
    pub rule: String,
    pub premise: bool,
    pub conclusion: Conclusion,
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
    /// Number of premise/conclusion instances evaluated.
    pub instances: usize,
    pub witnesses: Vec<String>,
}

impl GuardedResult {
    pub fn new(rule: impl Into<String>) -> GuardedResult {
        GuardedResult {
            rule: rule.into(),
            premise: false,
            conclusion: Conclusion::NotEvaluated,
            lhs: None,
            rhs: None,
            instances: 0,
            witnesses: Vec::new(),
        }
    }

    pub fn premise_failed(rule: impl Into<String>, witness: impl Into<String>) -> GuardedResult {
        let mut r = GuardedResult::new(rule);
        r.witnesses.push(witness.into());
        r
    }

    pub fn is_violation(&self) -> bool {
        self.premise && self.conclusion == Conclusion::Fails
    }

    pub fn with_values(mut self, lhs: Rational, rhs: Rational) -> GuardedResult {
        self.lhs = Some(lhs);
        self.rhs = Some(rhs);
        self
    }
}

impl fmt::Display for GuardedResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: premise {}, conclusion {}",
            self.rule,
            if self.premise { "HOLDS" } else { "FAILS" },
            self.conclusion
        )?;
        if let (Some(l), Some(r)) = (&self.lhs, &self.rhs) {
            write!(f, ", lhs {} rhs {}", exact_and_approx(l), exact_and_approx(r))?;
        }
        if self.instances > 0 {
            write!(f, ", {} instances", self.instances)?;
        }
        if self.is_violation() {
            f.write_str(", VIOLATION")?;
        }
        for w in &self.witnesses {
            write!(f, "\n  witness: {w}")?;
        }
        Ok(())
    }
}

/// Masses needed for one conditional comparison
/// pr(X | Y·B) against pr(X | B).
pub(crate) struct Comparison {
    pub xyb: BigUint,
    pub yb: BigUint,
    pub xb: BigUint,
    pub b: BigUint,
}

impl Comparison {
    pub fn new(m: &Measure, x: &Event, y: &Event, b: &Event) -> Comparison {
        let yb = y.intersection(b);
        let xb = x.intersection(b);
        Comparison {
            xyb: m.mass(&xb.intersection(y)),
            yb: m.mass(&yb),
            xb: m.mass(&xb),
            b: m.mass(b),
        }
    }

    pub fn defined(&self) -> bool {
        !self.yb.is_zero() && !self.b.is_zero()
    }

    /// Sign of pr(X|Y·B) − pr(X|B) by cross-multiplication. Requires
    /// [`Self::defined`].
    pub fn ordering(&self) -> std::cmp::Ordering {
        (&self.xyb * &self.b).cmp(&(&self.xb * &self.yb))
    }

    pub fn lhs(&self) -> Rational {
        Rational::new(self.xyb.clone().into(), self.yb.clone().into())
    }

    pub fn rhs(&self) -> Rational {
        Rational::new(self.xb.clone().into(), self.b.clone().into())
    }
}

pub(crate) fn conditional_or_none(m: &Measure, a: &Event, b: &Event) -> Option<Rational> {
    m.conditional(a, b).ok()
}

/// pr(A | B) ∈ {0, 1}, or B has probability zero.
pub(crate) fn determines(m: &Measure, b: &Event, a: &Event) -> bool {
    let mb = m.mass(b);
    if mb.is_zero() {
        return true;
    }
    let mab = m.mass(&a.intersection(b));
    mab.is_zero() || mab == mb
}
