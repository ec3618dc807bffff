use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::trit::Trit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Positive,
    Negative,
}

/// A variable `x_k` or its negation. Variables are 0-based internally and
/// rendered 1-based (`x1`, `~x1`).
///
/// The ordering puts every positive literal (by ascending variable) before
/// every negative literal (by ascending variable); greedy ties resolve to the
/// smallest literal in this order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Literal {
    pub var: usize,
    pub sign: Sign,
}

impl Literal {
    pub fn positive(var: usize) -> Self {
        Literal {
            var,
            sign: Sign::Positive,
        }
    }

    pub fn negative(var: usize) -> Self {
        Literal {
            var,
            sign: Sign::Negative,
        }
    }

    pub fn is_negated(self) -> bool {
        self.sign == Sign::Negative
    }

    pub fn complement(self) -> Self {
        Literal {
            var: self.var,
            sign: match self.sign {
                Sign::Positive => Sign::Negative,
                Sign::Negative => Sign::Positive,
            },
        }
    }

    /// The cell value that makes this literal true.
    pub fn satisfying_value(self) -> bool {
        self.sign == Sign::Positive
    }

    /// Dense index in `0..2n`, in literal order.
    pub fn slot(self, n: usize) -> usize {
        match self.sign {
            Sign::Positive => self.var,
            Sign::Negative => n + self.var,
        }
    }

    pub fn from_slot(slot: usize, n: usize) -> Self {
        if slot < n {
            Literal::positive(slot)
        } else {
            Literal::negative(slot - n)
        }
    }

    /// All `2n` literals in literal order.
    pub fn all(n: usize) -> impl Iterator<Item = Literal> {
        (0..2 * n).map(move |s| Literal::from_slot(s, n))
    }

    pub fn eval(self, x: bool) -> bool {
        x == self.satisfying_value()
    }

    /// Three-valued: `Some(b)` when the cell decides the literal.
    pub fn eval_trit(self, t: Trit) -> Option<bool> {
        t.to_bool().map(|b| self.eval(b))
    }
}

impl Ord for Literal {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.is_negated(), self.var).cmp(&(other.is_negated(), other.var))
    }
}

impl PartialOrd for Literal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_negated() {
            write!(f, "~x{}", self.var + 1)
        } else {
            write!(f, "x{}", self.var + 1)
        }
    }
}

impl FromStr for Literal {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (neg, rest) = match s.strip_prefix('~') {
            Some(r) => (true, r),
            None => (false, s),
        };
        let digits = rest
            .strip_prefix('x')
            .ok_or_else(|| format!("expected a literal like x3 or ~x3, found {s:?}"))?;
        let k: usize = digits
            .parse()
            .map_err(|_| format!("bad variable number in {s:?}"))?;
        if k == 0 {
            return Err(format!("variables are numbered from 1, found {s:?}"));
        }
        Ok(if neg {
            Literal::negative(k - 1)
        } else {
            Literal::positive(k - 1)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positive_literals_come_first() {
        let mut lits: Vec<Literal> = ["~x1", "x3", "~x2", "x1"]
            .iter()
            .map(|s| s.parse().unwrap())
            .collect();
        lits.sort();
        let shown: Vec<String> = lits.iter().map(ToString::to_string).collect();
        assert_eq!(shown, ["x1", "x3", "~x1", "~x2"]);
    }

    #[test]
    fn slots_round_trip() {
        for l in Literal::all(5) {
            assert_eq!(Literal::from_slot(l.slot(5), 5), l);
        }
        let order: Vec<Literal> = Literal::all(3).collect();
        let mut sorted = order.clone();
        sorted.sort();
        assert_eq!(order, sorted);
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!("x0".parse::<Literal>().is_err());
        assert!("y1".parse::<Literal>().is_err());
        assert!("~".parse::<Literal>().is_err());
    }
}
