//! Brute-force checks that share no code path with the learner's scoring:
//! consistency certificates, exhaustive minimum-size DNF search for tiny
//! inputs, and a crisp-only greedy learner built on plain rational sums.

use std::collections::HashSet;

use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

use crate::dataset::{Dataset, Label};
use crate::formula::{DnfFormula, Term, Ternary};
use crate::literal::Literal;
use crate::trit::{Trit, TritVec};

/// Completions the consistency search may visit before giving up.
pub const COMPLETION_BUDGET: u64 = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("instance {id:?} needs more than {budget} completions")]
    SearchBudgetExceeded { id: String, budget: u64 },
    #[error("instance {id:?} has missing cells; a certain dataset is required")]
    NotCertain { id: String },
    #[error("instance {id:?} has {found} cells, formula expects {expected}")]
    LengthMismatch {
        id: String,
        expected: usize,
        found: usize,
    },
    #[error("positive {positive:?} and negative {negative:?} cannot be separated")]
    Inconsistent { positive: String, negative: String },
    #[error("no literal has positive relevance while constraints remain")]
    NoCandidate,
    #[error("no consistent formula with at most {max_literals} literals")]
    BudgetExceeded { max_literals: usize },
    #[error("exhaustive search supports at most {max} variables, got {n}")]
    TooManyVariables { n: usize, max: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    /// Certain instance, classified as labelled.
    Exact,
    /// Uncertain instance; this completion is classified as labelled.
    CompletionWitness(Vec<bool>),
    Violated,
}

impl Verdict {
    pub fn is_violated(&self) -> bool {
        matches!(self, Verdict::Violated)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConsistencyCertificate {
    pub id: String,
    pub label: Label,
    pub verdict: Verdict,
}

struct Search<'a> {
    f: &'a DnfFormula,
    want: bool,
    visited: u64,
}

impl Search<'_> {
    /// Depth-first over `free` (0 before 1), pruning on Kleene verdicts.
    fn find(&mut self, x: &mut TritVec, free: &[usize]) -> Option<bool> {
        self.visited += 1;
        if self.visited > COMPLETION_BUDGET {
            return None;
        }
        match self.f.eval_ternary(x).expect("length checked") {
            Ternary::CertainlyTrue => return Some(self.want),
            Ternary::CertainlyFalse => return Some(!self.want),
            Ternary::Undetermined => {}
        }
        let (&k, rest) = free.split_first()?;
        for b in [false, true] {
            x.set(k, Trit::from_bool(b));
            match self.find(x, rest) {
                Some(true) => return Some(true),
                Some(false) => {}
                None => return None,
            }
        }
        x.set(k, Trit::Unknown);
        Some(false)
    }
}

/// Checks each instance against the formula: a certain instance must be
/// classified as labelled; an uncertain one needs some completion that is.
/// Only missing cells on variables the formula mentions are searched.
pub fn verify_consistency(
    f: &DnfFormula,
    d: &Dataset,
) -> Result<Vec<ConsistencyCertificate>, OracleError> {
    let vars: HashSet<usize> = f.variables().into_iter().collect();
    let mut out = Vec::with_capacity(d.len());
    for inst in d.instances() {
        if inst.cells.len() != f.n() {
            return Err(OracleError::LengthMismatch {
                id: inst.id.clone(),
                expected: f.n(),
                found: inst.cells.len(),
            });
        }
        let want = inst.label == Label::Positive;
        let verdict = if let Some(bits) = inst.cells.to_bools() {
            if f.eval_certain(&bits).expect("length checked") == want {
                Verdict::Exact
            } else {
                Verdict::Violated
            }
        } else {
            let free: Vec<usize> = inst
                .cells
                .unknown_positions()
                .into_iter()
                .filter(|k| vars.contains(k))
                .collect();
            let mut x = inst.cells.clone();
            for k in inst.cells.unknown_positions() {
                if !vars.contains(&k) {
                    x.set(k, Trit::False);
                }
            }
            let mut search = Search {
                f,
                want,
                visited: 0,
            };
            match search.find(&mut x, &free) {
                Some(true) => {
                    let witness = x.iter().map(|t| t.to_bool().unwrap_or(false)).collect();
                    Verdict::CompletionWitness(witness)
                }
                Some(false) => Verdict::Violated,
                None => {
                    return Err(OracleError::SearchBudgetExceeded {
                        id: inst.id.clone(),
                        budget: COMPLETION_BUDGET,
                    })
                }
            }
        };
        out.push(ConsistencyCertificate {
            id: inst.id.clone(),
            label: inst.label,
            verdict,
        });
    }
    Ok(out)
}

fn certain_rows(d: &Dataset, label: Label) -> Result<Vec<Vec<bool>>, OracleError> {
    let list = match label {
        Label::Positive => d.positives(),
        Label::Negative => d.negatives(),
    };
    let mut seen = HashSet::new();
    let mut rows = Vec::new();
    for inst in list {
        let bits = inst
            .cells
            .to_bools()
            .ok_or_else(|| OracleError::NotCertain { id: inst.id.clone() })?;
        if seen.insert(bits.clone()) {
            rows.push(bits);
        }
    }
    Ok(rows)
}

fn satisfies(term: &[Literal], x: &[bool]) -> bool {
    term.iter().all(|l| l.eval(x[l.var]))
}

/// Largest `n` accepted by [`minimal_dnf_exhaustive`].
pub const EXHAUSTIVE_MAX_VARS: usize = 6;

/// The first consistent DNF in canonical order: fewest literals, then fewest
/// terms, then lexicographic over terms sorted by (length, literals).
pub fn minimal_dnf_exhaustive(d: &Dataset, max_literals: usize) -> Result<DnfFormula, OracleError> {
    let n = d.n();
    if n > EXHAUSTIVE_MAX_VARS {
        return Err(OracleError::TooManyVariables {
            n,
            max: EXHAUSTIVE_MAX_VARS,
        });
    }
    let pos = certain_rows(d, Label::Positive)?;
    let neg = certain_rows(d, Label::Negative)?;
    if let Some(u) = pos.iter().find(|u| neg.contains(u)) {
        let id = |list: &[crate::dataset::Instance]| {
            list.iter()
                .find(|i| i.cells.to_bools().as_ref() == Some(u))
                .map(|i| i.id.clone())
                .unwrap_or_default()
        };
        return Err(OracleError::Inconsistent {
            positive: id(d.positives()),
            negative: id(d.negatives()),
        });
    }
    if pos.is_empty() {
        return Ok(DnfFormula::empty(n));
    }
    if neg.is_empty() {
        return Ok(DnfFormula::new(n, vec![Term::default()]));
    }

    // Every term of a consistent formula rejects all negatives; only terms
    // that also accept some positive are worth trying.
    let mut candidates: Vec<(Vec<Literal>, u64)> = Vec::new();
    for code in 1..3usize.pow(n as u32) {
        let mut c = code;
        let mut lits = Vec::new();
        for var in 0..n {
            match c % 3 {
                1 => lits.push(Literal::positive(var)),
                2 => lits.push(Literal::negative(var)),
                _ => {}
            }
            c /= 3;
        }
        if neg.iter().any(|v| satisfies(&lits, v)) {
            continue;
        }
        let cover = pos
            .iter()
            .enumerate()
            .filter(|(_, u)| satisfies(&lits, u))
            .fold(0u64, |m, (i, _)| m | 1 << i);
        if cover != 0 {
            candidates.push((lits, cover));
        }
    }
    let key = |lits: &[Literal]| -> (usize, Vec<(usize, bool)>) {
        (lits.len(), lits.iter().map(|l| (l.var, l.is_negated())).collect())
    };
    candidates.sort_by_key(|(l, _)| key(l));
    let full = if pos.len() == 64 { u64::MAX } else { (1u64 << pos.len()) - 1 };

    fn pick(
        cands: &[(Vec<Literal>, u64)],
        from: usize,
        terms_left: usize,
        lits_left: usize,
        covered: u64,
        full: u64,
        chosen: &mut Vec<usize>,
    ) -> bool {
        if terms_left == 0 {
            return lits_left == 0 && covered == full;
        }
        for k in from..cands.len() {
            let len = cands[k].0.len();
            // Candidates are sorted by length: later ones are no shorter.
            if len * terms_left > lits_left {
                break;
            }
            chosen.push(k);
            if pick(cands, k + 1, terms_left - 1, lits_left - len, covered | cands[k].1, full, chosen) {
                return true;
            }
            chosen.pop();
        }
        false
    }

    for total in 1..=max_literals {
        for terms in 1..=total {
            let mut chosen = Vec::new();
            if pick(&candidates, 0, terms, total, 0, full, &mut chosen) {
                let terms = chosen
                    .into_iter()
                    .map(|k| Term::new(candidates[k].0.clone()))
                    .collect();
                return Ok(DnfFormula::new(n, terms));
            }
        }
    }
    Err(OracleError::BudgetExceeded { max_literals })
}

/// Greedy learner for certain data only, written directly from the crisp
/// set definition: `S_ij` holds `x_k` where `u_k = 1, v_k = 0` and `~x_k`
/// where `u_k = 0, v_k = 1`; every literal in a set weighs `1/|S_ij|`.
pub fn reference_brain(d: &Dataset) -> Result<DnfFormula, OracleError> {
    let n = d.n();
    let mut pos = certain_rows(d, Label::Positive)?;
    let neg = certain_rows(d, Label::Negative)?;
    let mut formula = DnfFormula::empty(n);
    let name = |list: &[crate::dataset::Instance], bits: &[bool]| {
        list.iter()
            .find(|i| i.cells.to_bools().as_deref() == Some(bits))
            .map(|i| i.id.clone())
            .unwrap_or_default()
    };

    while !pos.is_empty() {
        let mut groups: Vec<Vec<Vec<Literal>>> = Vec::with_capacity(pos.len());
        for u in &pos {
            let mut group = Vec::with_capacity(neg.len());
            for v in &neg {
                let set: Vec<Literal> = (0..n)
                    .filter_map(|k| match (u[k], v[k]) {
                        (true, false) => Some(Literal::positive(k)),
                        (false, true) => Some(Literal::negative(k)),
                        _ => None,
                    })
                    .collect();
                if set.is_empty() {
                    return Err(OracleError::Inconsistent {
                        positive: name(d.positives(), u),
                        negative: name(d.negatives(), v),
                    });
                }
                group.push(set);
            }
            groups.push(group);
        }
        let pq = BigRational::from_integer((pos.len() * neg.len().max(1)).into());

        let mut term: Vec<Literal> = Vec::new();
        while !groups.is_empty() && groups.iter().all(|g| !g.is_empty()) {
            let mut best: Option<(Literal, BigRational)> = None;
            for l in Literal::all(n) {
                if term.contains(&l.complement()) {
                    continue;
                }
                let mut r = BigRational::zero();
                for set in groups.iter().flatten() {
                    if set.contains(&l) {
                        r += BigRational::new(1.into(), set.len().into());
                    }
                }
                r /= pq.clone();
                if r.is_zero() {
                    continue;
                }
                if best.as_ref().is_none_or(|(bl, br)| r > *br || (r == *br && l < *bl)) {
                    best = Some((l, r));
                }
            }
            let (l, _) = best.ok_or(OracleError::NoCandidate)?;
            term.push(l);
            groups.retain(|g| g.iter().any(|s| s.contains(&l)));
            for g in &mut groups {
                g.retain(|s| !s.contains(&l));
            }
        }
        if groups.is_empty() && !neg.is_empty() {
            return Err(OracleError::NoCandidate);
        }
        pos.retain(|u| !satisfies(&term, u));
        formula.push(Term::new(term));
    }
    Ok(formula)
}
