//! ASCII surface syntax for propositions.
//!
//! ```text
//! prop  := disj
//! disj  := conj ("|" conj)*
//! conj  := unary (("." | "&") unary)*
//! unary := "~" unary | "(" prop ")" | atom
//! atom  := PRED "_" RANGE | "H" | "Exact(" INT ")" | "T"
//! PRED  := F | G | FG | FnG | nFG | nFnG | F>G | nF | nG
//! RANGE := INT | INT ":" INT
//! ```
//!
//! `PRED_i:j` abbreviates the conjunction over objects i..=j. `T` is the
//! tautology.

use thiserror::Error;

use crate::model::{CategorySet, Proposition, PREDICATE_NAMES};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at position {position}: {message}")]
pub struct ParseError {
    /// Zero-based character offset into the input.
    pub position: usize,
    pub message: String,
}

/// Parses `text` for a universe of `n` objects.
pub fn parse(text: &str, n: usize) -> Result<Proposition, ParseError> {
    let mut parser = Parser {
        chars: text.chars().collect(),
        pos: 0,
        n,
    };
    let prop = parser.disj()?;
    parser.skip_ws();
    if parser.pos < parser.chars.len() {
        return Err(parser.error(format!("unexpected '{}'", parser.chars[parser.pos])));
    }
    Ok(prop)
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
    n: usize,
}

impl Parser {
    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError {
            position: self.pos,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected '{c}'")))
        }
    }

    fn disj(&mut self) -> Result<Proposition, ParseError> {
        let first = self.conj()?;
        let mut parts = vec![first];
        while self.peek() == Some('|') {
            self.pos += 1;
            parts.push(self.conj()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Proposition::Or(parts)
        })
    }

    fn conj(&mut self) -> Result<Proposition, ParseError> {
        let mut acc = self.unary()?;
        while matches!(self.peek(), Some('.') | Some('&')) {
            self.pos += 1;
            let rhs = self.unary()?;
            acc = acc.and(rhs);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Proposition, ParseError> {
        match self.peek() {
            Some('~') => {
                self.pos += 1;
                Ok(Proposition::not(self.unary()?))
            }
            Some('(') => {
                self.pos += 1;
                let inner = self.disj()?;
                self.expect(')')?;
                // Keep a parenthesized conjunction from merging into its parent.
                Ok(match inner {
                    Proposition::And(v) if v.len() > 1 => Proposition::And(vec![Proposition::And(v)]),
                    other => other,
                })
            }
            Some(_) => self.atom(),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn word(&mut self) -> String {
        let start = self.pos;
        while self
            .chars
            .get(self.pos)
            .is_some_and(|c| c.is_ascii_alphabetic() || *c == '>')
        {
            self.pos += 1;
        }
        self.chars[start..self.pos].iter().collect()
    }

    fn integer(&mut self) -> Result<usize, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.chars.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected an integer"));
        }
        let digits: String = self.chars[start..self.pos].iter().collect();
        digits.parse().map_err(|_| ParseError {
            position: start,
            message: "integer too large".into(),
        })
    }

    fn object_index(&mut self) -> Result<usize, ParseError> {
        self.skip_ws();
        let start = self.pos;
        let b = self.integer()?;
        if b == 0 || b > self.n {
            return Err(ParseError {
                position: start,
                message: format!("object index {b} outside 1..={}", self.n),
            });
        }
        Ok(b)
    }

    fn atom(&mut self) -> Result<Proposition, ParseError> {
        let start = self.pos;
        let word = self.word();
        match word.as_str() {
            "" => return Err(self.error("expected a predicate, H, T or Exact(k)")),
            "H" => return Ok(Proposition::H),
            "T" => return Ok(Proposition::top()),
            "Exact" => {
                self.expect('(')?;
                let at = {
                    self.skip_ws();
                    self.pos
                };
                let k = self.integer()?;
                if k > self.n {
                    return Err(ParseError {
                        position: at,
                        message: format!("count {k} exceeds universe size {}", self.n),
                    });
                }
                self.expect(')')?;
                return Ok(Proposition::Exact(k));
            }
            _ => {}
        }
        let Some(&(_, set)) = PREDICATE_NAMES.iter().find(|(name, _)| *name == word) else {
            return Err(ParseError {
                position: start,
                message: format!("unknown predicate '{word}'"),
            });
        };
        if self.chars.get(self.pos) != Some(&'_') {
            return Err(self.error("expected '_' after predicate"));
        }
        self.pos += 1;
        let from = self.object_index()?;
        if self.chars.get(self.pos) == Some(&':') {
            self.pos += 1;
            let at = self.pos;
            let to = self.object_index()?;
            if to < from {
                return Err(ParseError {
                    position: at,
                    message: format!("empty range {from}:{to}"),
                });
            }
            return Ok(if from == to {
                Proposition::atom(from, set)
            } else {
                Proposition::range(set, from, to)
            });
        }
        Ok(Proposition::atom(from, set))
    }
}

/// Renders a proposition in the surface syntax. Atoms use the nine predicate
/// names (negated or disjoined where no name fits); runs of the same named
/// predicate on consecutive objects compress to `PRED_i:j`.
pub fn format(prop: &Proposition) -> String {
    render(prop, Level::Disj)
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Level {
    Disj,
    Conj,
    Unary,
}

fn render(prop: &Proposition, level: Level) -> String {
    match prop {
        Proposition::Atom { object, allowed } => render_atom(*object, *allowed),
        Proposition::Not(inner) => format!("~{}", render(inner, Level::Unary)),
        Proposition::H => "H".into(),
        Proposition::Exact(k) => format!("Exact({k})"),
        Proposition::Implies(a, b) => {
            format!("(~{} | {})", render(a, Level::Unary), render(b, Level::Conj))
        }
        Proposition::And(parts) => match parts.len() {
            0 => "T".into(),
            1 => render(&parts[0], level),
            _ => {
                let body = render_conjunction(parts);
                if level == Level::Unary {
                    format!("({body})")
                } else {
                    body
                }
            }
        },
        Proposition::Or(parts) => match parts.len() {
            0 => "~T".into(),
            1 => render(&parts[0], level),
            _ => {
                let body = parts
                    .iter()
                    .map(|p| render(p, Level::Conj))
                    .collect::<Vec<_>>()
                    .join(" | ");
                if level == Level::Disj {
                    body
                } else {
                    format!("({body})")
                }
            }
        },
    }
}

fn render_conjunction(parts: &[Proposition]) -> String {
    let mut out: Vec<String> = Vec::new();
    let mut i = 0;
    while i < parts.len() {
        if let Proposition::Atom { object, allowed } = &parts[i] {
            if let Some(name) = allowed.predicate_name() {
                let mut j = i + 1;
                while let Some(Proposition::Atom { object: next, allowed: a }) = parts.get(j) {
                    if a == allowed && *next == object + (j - i) {
                        j += 1;
                    } else {
                        break;
                    }
                }
                if j - i >= 2 {
                    out.push(format!("{name}_{}:{}", object, object + (j - i - 1)));
                    i = j;
                    continue;
                }
            }
        }
        out.push(render(&parts[i], Level::Conj));
        i += 1;
    }
    out.join(" . ")
}

fn render_atom(object: usize, allowed: CategorySet) -> String {
    if let Some(name) = allowed.predicate_name() {
        return format!("{name}_{object}");
    }
    if let Some(name) = allowed.complement().predicate_name() {
        return format!("~{name}_{object}");
    }
    if allowed.is_full() {
        return format!("(F_{object} | nF_{object})");
    }
    let disjuncts: Vec<String> = allowed
        .members()
        .map(|q| format!("{}_{object}", q.name()))
        .collect();
    format!("({})", disjuncts.join(" | "))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::QCategory;

    #[test]
    fn conjunction_with_implication_predicate() {
        let p = parse("FG_1 . F>G_4", 4).unwrap();
        assert_eq!(
            p,
            Proposition::And(vec![
                Proposition::atom(1, CategorySet::single(QCategory::Q1)),
                Proposition::atom(4, CategorySet::of(&[QCategory::Q1, QCategory::Q3, QCategory::Q4])),
            ])
        );
    }

    #[test]
    fn range_and_negation() {
        let p = parse("F_1:2 . ~F_3", 3).unwrap();
        let expected = Proposition::f(1)
            .and(Proposition::f(2))
            .and(Proposition::not(Proposition::f(3)));
        assert_eq!(p, expected);
        assert_eq!(p.event(3).unwrap(), expected.event(3).unwrap());
    }

    #[test]
    fn errors_carry_positions() {
        let err = parse("F_0", 3).unwrap_err();
        assert_eq!(err.position, 2);
        let err = parse("FG_1 . F_4", 3).unwrap_err();
        assert_eq!(err.position, 9);
        assert_eq!(parse("FG_1 .", 3).unwrap_err().position, 6);
        assert_eq!(parse("Q_1", 3).unwrap_err().position, 0);
        assert!(parse("F_3:2", 3).is_err());
        assert!(parse("Exact(4)", 3).is_err());
        assert!(parse("(F_1", 3).is_err());
        assert!(parse("F_1 F_2", 3).is_err());
        assert!(parse("", 3).is_err());
    }

    #[test]
    fn precedence_not_over_and_over_or() {
        let p = parse("~F_1 . G_2 | H", 2).unwrap();
        let expected = Proposition::Or(vec![
            Proposition::not(Proposition::f(1)).and(Proposition::g(2)),
            Proposition::H,
        ]);
        assert_eq!(p, expected);
        assert_eq!(parse("F_1 & G_1", 1).unwrap(), Proposition::f(1).and(Proposition::g(1)));
    }

    #[test]
    fn formatting() {
        assert_eq!(format(&Proposition::category(2, QCategory::Q4)), "nFnG_2");
        assert_eq!(format(&Proposition::range(CategorySet::single(QCategory::Q1), 1, 3)), "FG_1:3");
        assert_eq!(format(&Proposition::H), "H");
        assert_eq!(format(&Proposition::top()), "T");
        assert_eq!(format(&Proposition::Exact(2)), "Exact(2)");
        assert_eq!(
            format(&Proposition::atom(1, CategorySet::single(QCategory::Q1).complement())),
            "~FG_1"
        );
        assert_eq!(
            format(&Proposition::atom(3, CategorySet::of(&[QCategory::Q1, QCategory::Q4]))),
            "(FG_3 | nFnG_3)"
        );
    }

    #[test]
    fn format_round_trips_semantically() {
        let samples = [
            "FG_1:3 . F>G_4 | ~(H . Exact(2))",
            "~~F_1 . (G_2 | nG_3)",
            "T | ~T",
            "(F_1 . G_2) . nF_3",
        ];
        for text in samples {
            let p = parse(text, 4).unwrap();
            let again = parse(&format(&p), 4).unwrap();
            assert_eq!(p.event(4).unwrap(), again.event(4).unwrap(), "{text}");
        }
    }
}
