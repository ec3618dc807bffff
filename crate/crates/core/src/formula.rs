//! DNF formulas: evaluation over Boolean and ternary inputs, and the
//! canonical text and JSON forms.
//!
//! Text grammar: literals are `x3` / `~x3`, a space joins literals into a
//! term, ` | ` joins terms. `FALSE` is the empty disjunction and `TRUE` the
//! empty conjunction.
//!
//! ```
//! use ubrain::DnfFormula;
//! let f: DnfFormula = "~x9 ~x14 | ~x10 x14".parse().unwrap();
//! assert_eq!(f.terms().len(), 2);
//! assert_eq!(f.to_string(), "~x9 ~x14 | ~x10 x14");
//! ```

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::literal::Literal;
use crate::trit::TritVec;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("input has {found} variables, formula expects {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },
    #[error("invalid formula JSON: {0}")]
    Json(String),
}

/// Three-valued result of evaluating a formula on a partially known input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ternary {
    CertainlyTrue,
    CertainlyFalse,
    Undetermined,
}

impl Ternary {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Ternary::CertainlyTrue
        } else {
            Ternary::CertainlyFalse
        }
    }
}

/// A conjunction of literals, kept in selection order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Term {
    literals: Vec<Literal>,
}

impl Term {
    /// Panics if a variable occurs twice.
    pub fn new(literals: Vec<Literal>) -> Self {
        Term::try_new(literals).expect("a term mentions each variable at most once")
    }

    pub fn try_new(literals: Vec<Literal>) -> Option<Self> {
        let mut seen = BTreeSet::new();
        if literals.iter().all(|l| seen.insert(l.var)) {
            Some(Term { literals })
        } else {
            None
        }
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn contains(&self, l: Literal) -> bool {
        self.literals.contains(&l)
    }

    pub(crate) fn push(&mut self, l: Literal) {
        debug_assert!(self.literals.iter().all(|m| m.var != l.var));
        self.literals.push(l);
    }

    pub fn eval(&self, x: &[bool]) -> bool {
        self.literals.iter().all(|l| l.eval(x[l.var]))
    }

    pub fn eval_ternary(&self, x: &TritVec) -> Ternary {
        let mut all_true = true;
        for l in &self.literals {
            match l.eval_trit(x.get(l.var)) {
                Some(false) => return Ternary::CertainlyFalse,
                Some(true) => {}
                None => all_true = false,
            }
        }
        if all_true {
            Ternary::CertainlyTrue
        } else {
            Ternary::Undetermined
        }
    }

    /// Some completion of `x` satisfies the term.
    pub fn possibly_satisfied_by(&self, x: &TritVec) -> bool {
        self.eval_ternary(x) != Ternary::CertainlyFalse
    }

    /// Literals sorted by (variable, positive first).
    pub fn canonical(&self) -> Term {
        let mut literals = self.literals.clone();
        literals.sort_by_key(|l| (l.var, l.is_negated()));
        Term { literals }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.literals.is_empty() {
            return f.write_str("TRUE");
        }
        for (k, l) in self.literals.iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// A disjunction of terms over `n` variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DnfFormula {
    n: usize,
    terms: Vec<Term>,
}

impl DnfFormula {
    /// Constant false over `n` variables.
    pub fn empty(n: usize) -> Self {
        DnfFormula {
            n,
            terms: Vec::new(),
        }
    }

    /// Panics if a term mentions a variable `>= n`.
    pub fn new(n: usize, terms: Vec<Term>) -> Self {
        assert!(
            terms.iter().flat_map(Term::literals).all(|l| l.var < n),
            "literal outside the {n}-variable range"
        );
        DnfFormula { n, terms }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub(crate) fn push(&mut self, t: Term) {
        self.terms.push(t);
    }

    pub fn literal_count(&self) -> usize {
        self.terms.iter().map(Term::len).sum()
    }

    /// Variables mentioned anywhere, ascending.
    pub fn variables(&self) -> Vec<usize> {
        let set: BTreeSet<usize> = self
            .terms
            .iter()
            .flat_map(|t| t.literals().iter().map(|l| l.var))
            .collect();
        set.into_iter().collect()
    }

    pub fn eval_certain(&self, x: &[bool]) -> Result<bool, FormulaError> {
        if x.len() != self.n {
            return Err(FormulaError::LengthMismatch {
                expected: self.n,
                found: x.len(),
            });
        }
        Ok(self.terms.iter().any(|t| t.eval(x)))
    }

    /// Strong-Kleene evaluation.
    pub fn eval_ternary(&self, x: &TritVec) -> Result<Ternary, FormulaError> {
        if x.len() != self.n {
            return Err(FormulaError::LengthMismatch {
                expected: self.n,
                found: x.len(),
            });
        }
        let mut out = Ternary::CertainlyFalse;
        for t in &self.terms {
            match t.eval_ternary(x) {
                Ternary::CertainlyTrue => return Ok(Ternary::CertainlyTrue),
                Ternary::Undetermined => out = Ternary::Undetermined,
                Ternary::CertainlyFalse => {}
            }
        }
        Ok(out)
    }

    /// True iff every assignment satisfies the formula (Shannon expansion).
    pub fn is_tautology(&self) -> bool {
        fn covers(terms: &[Vec<Literal>]) -> bool {
            if terms.iter().any(Vec::is_empty) {
                return true;
            }
            let Some(var) = terms.first().map(|t| t[0].var) else {
                return false;
            };
            [true, false].iter().all(|&val| {
                let restricted: Vec<Vec<Literal>> = terms
                    .iter()
                    .filter(|t| t.iter().all(|l| l.var != var || l.eval(val)))
                    .map(|t| t.iter().copied().filter(|l| l.var != var).collect())
                    .collect();
                covers(&restricted)
            })
        }
        let terms: Vec<Vec<Literal>> = self.terms.iter().map(|t| t.literals.clone()).collect();
        covers(&terms)
    }

    /// Parses the canonical text form with an explicit variable count.
    pub fn parse_with_vars(text: &str, n: usize) -> Result<Self, FormulaError> {
        let f = parse_terms(text)?;
        if let Some(l) = f.iter().flat_map(Term::literals).find(|l| l.var >= n) {
            return Err(FormulaError::Parse {
                position: 0,
                message: format!("{l} exceeds the {n}-variable range"),
            });
        }
        Ok(DnfFormula { n, terms: f })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&JsonFormula::from(self)).expect("formula JSON is infallible")
    }

    pub fn from_json(text: &str) -> Result<Self, FormulaError> {
        let j: JsonFormula =
            serde_json::from_str(text).map_err(|e| FormulaError::Json(e.to_string()))?;
        j.try_into()
    }

    /// Accepts either the JSON or the text form; text needs the variable
    /// count from `n` (or infers it when `None`).
    pub fn parse_any(text: &str, n: Option<usize>) -> Result<Self, FormulaError> {
        let trimmed = text.trim();
        if trimmed.starts_with('{') {
            let f = DnfFormula::from_json(trimmed)?;
            match n {
                Some(n) if n != f.n => Err(FormulaError::LengthMismatch {
                    expected: n,
                    found: f.n,
                }),
                _ => Ok(f),
            }
        } else {
            match n {
                Some(n) => DnfFormula::parse_with_vars(trimmed, n),
                None => trimmed.parse(),
            }
        }
    }
}

fn parse_terms(text: &str) -> Result<Vec<Term>, FormulaError> {
    let trimmed = text.trim();
    if trimmed == "FALSE" {
        return Ok(Vec::new());
    }
    let mut terms = Vec::new();
    let mut offset = 0;
    for chunk in text.split('|') {
        let mut literals = Vec::new();
        let mut saw_true = false;
        let mut pos = offset;
        for tok in chunk.split(' ') {
            let here = pos;
            pos += tok.len() + 1;
            let tok = tok.trim();
            if tok.is_empty() {
                continue;
            }
            if tok == "TRUE" {
                saw_true = true;
                continue;
            }
            let l: Literal = tok.parse().map_err(|message| FormulaError::Parse {
                position: here,
                message,
            })?;
            literals.push(l);
        }
        if saw_true && !literals.is_empty() {
            return Err(FormulaError::Parse {
                position: offset,
                message: "TRUE cannot be mixed with literals".into(),
            });
        }
        if !saw_true && literals.is_empty() {
            return Err(FormulaError::Parse {
                position: offset,
                message: "empty term".into(),
            });
        }
        let term = Term::try_new(literals).ok_or_else(|| FormulaError::Parse {
            position: offset,
            message: "a variable occurs twice in one term".into(),
        })?;
        terms.push(term);
        offset += chunk.len() + 1;
    }
    Ok(terms)
}

impl FromStr for DnfFormula {
    type Err = FormulaError;

    /// Infers `n` as the largest variable mentioned.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let terms = parse_terms(s)?;
        let n = terms
            .iter()
            .flat_map(Term::literals)
            .map(|l| l.var + 1)
            .max()
            .unwrap_or(0);
        Ok(DnfFormula { n, terms })
    }
}

impl fmt::Display for DnfFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("FALSE");
        }
        for (k, t) in self.terms.iter().enumerate() {
            if k > 0 {
                f.write_str(" | ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct JsonLiteral {
    var: usize,
    neg: bool,
}

#[derive(Serialize, Deserialize)]
struct JsonFormula {
    n: usize,
    terms: Vec<Vec<JsonLiteral>>,
}

impl From<&DnfFormula> for JsonFormula {
    fn from(f: &DnfFormula) -> Self {
        JsonFormula {
            n: f.n,
            terms: f
                .terms
                .iter()
                .map(|t| {
                    t.literals
                        .iter()
                        .map(|l| JsonLiteral {
                            var: l.var + 1,
                            neg: l.is_negated(),
                        })
                        .collect()
                })
                .collect(),
        }
    }
}

impl TryFrom<JsonFormula> for DnfFormula {
    type Error = FormulaError;

    fn try_from(j: JsonFormula) -> Result<Self, Self::Error> {
        let mut terms = Vec::with_capacity(j.terms.len());
        for t in j.terms {
            let mut lits = Vec::with_capacity(t.len());
            for l in t {
                if l.var == 0 || l.var > j.n {
                    return Err(FormulaError::Json(format!(
                        "variable {} outside 1..={}",
                        l.var, j.n
                    )));
                }
                lits.push(if l.neg {
                    Literal::negative(l.var - 1)
                } else {
                    Literal::positive(l.var - 1)
                });
            }
            terms.push(
                Term::try_new(lits)
                    .ok_or_else(|| FormulaError::Json("a variable occurs twice in a term".into()))?,
            );
        }
        Ok(DnfFormula { n: j.n, terms })
    }
}
