//! Labelled ternary instances, datasets, and the two preprocessing passes:
//! uncertainty reduction and repetition deletion.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::trit::{Trit, TritVec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Positive,
    Negative,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Positive => "+",
            Label::Negative => "-",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DataError {
    #[error("instance {id:?} has {found} cells, expected {expected}")]
    LengthMismatch {
        id: String,
        expected: usize,
        found: usize,
    },
    #[error("instance {id:?} is filed under the wrong class")]
    WrongLabel { id: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Instance {
    pub id: String,
    pub cells: TritVec,
    pub label: Label,
}

impl Instance {
    pub fn new(id: impl Into<String>, cells: TritVec, label: Label) -> Self {
        Instance {
            id: id.into(),
            cells,
            label,
        }
    }

    pub fn is_certain(&self) -> bool {
        self.cells.is_certain()
    }
}

/// Positive and negative instances over `n` variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    n: usize,
    positives: Vec<Instance>,
    negatives: Vec<Instance>,
}

impl Dataset {
    pub fn new(
        n: usize,
        positives: Vec<Instance>,
        negatives: Vec<Instance>,
    ) -> Result<Self, DataError> {
        for (list, label) in [(&positives, Label::Positive), (&negatives, Label::Negative)] {
            for inst in list {
                if inst.cells.len() != n {
                    return Err(DataError::LengthMismatch {
                        id: inst.id.clone(),
                        expected: n,
                        found: inst.cells.len(),
                    });
                }
                if inst.label != label {
                    return Err(DataError::WrongLabel {
                        id: inst.id.clone(),
                    });
                }
            }
        }
        Ok(Dataset {
            n,
            positives,
            negatives,
        })
    }

    /// Builds a dataset from `"10?1"`-style rows; ids are `u1.., v1..`.
    ///
    /// Panics on malformed rows. Intended for tests and examples.
    pub fn from_rows(positives: &[&str], negatives: &[&str]) -> Self {
        let parse = |rows: &[&str], prefix: &str, label| -> Vec<Instance> {
            rows.iter()
                .enumerate()
                .map(|(i, r)| {
                    let cells = TritVec::from_str(r).expect("malformed row");
                    Instance::new(format!("{prefix}{}", i + 1), cells, label)
                })
                .collect()
        };
        let pos = parse(positives, "u", Label::Positive);
        let neg = parse(negatives, "v", Label::Negative);
        let n = pos
            .first()
            .or(neg.first())
            .map(|i| i.cells.len())
            .unwrap_or(0);
        Dataset::new(n, pos, neg).expect("rows of unequal length")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn positives(&self) -> &[Instance] {
        &self.positives
    }

    pub fn negatives(&self) -> &[Instance] {
        &self.negatives
    }

    pub fn len(&self) -> usize {
        self.positives.len() + self.negatives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn instances(&self) -> impl Iterator<Item = &Instance> {
        self.positives.iter().chain(self.negatives.iter())
    }

    pub fn unknown_count(&self) -> usize {
        self.instances().map(|i| i.cells.unknown_count()).sum()
    }

    pub fn is_certain(&self) -> bool {
        self.instances().all(Instance::is_certain)
    }

    pub fn into_parts(self) -> (usize, Vec<Instance>, Vec<Instance>) {
        (self.n, self.positives, self.negatives)
    }
}

/// A positive/negative pair that no literal can separate (0-based indices).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Violation {
    pub positive: usize,
    pub negative: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConsistencyReport {
    pub violations: Vec<Violation>,
}

impl ConsistencyReport {
    pub fn is_consistent(&self) -> bool {
        self.violations.is_empty()
    }
}

pub(crate) fn find_violations(positives: &[TritVec], negatives: &[TritVec]) -> Vec<Violation> {
    let mut by_cells: HashMap<&TritVec, Vec<usize>> = HashMap::new();
    for (j, v) in negatives.iter().enumerate() {
        if v.is_certain() {
            by_cells.entry(v).or_default().push(j);
        }
    }
    let mut out = Vec::new();
    for (i, u) in positives.iter().enumerate() {
        if !u.is_certain() {
            continue;
        }
        if let Some(js) = by_cells.get(u) {
            out.extend(js.iter().map(|&j| Violation {
                positive: i,
                negative: j,
            }));
        }
    }
    out
}

/// Every positive/negative pair with identical certain cells.
///
/// Pairs sharing an unknown cell are separable (both literals of that
/// variable get a positive membership), so only fully certain duplicates
/// across classes can violate self-consistency.
pub fn check_self_consistency(d: &Dataset) -> ConsistencyReport {
    let pos: Vec<TritVec> = d.positives.iter().map(|i| i.cells.clone()).collect();
    let neg: Vec<TritVec> = d.negatives.iter().map(|i| i.cells.clone()).collect();
    ConsistencyReport {
        violations: find_violations(&pos, &neg),
    }
}

/// A single forced cell produced by uncertainty reduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Substitution {
    pub label: Label,
    /// Index within its class list.
    pub index: usize,
    pub var: usize,
    pub value: bool,
}

/// The only separating coordinate of a pair, if exactly one cell differs and
/// exactly one side of it is unknown.
fn forced_cell(u: &TritVec, v: &TritVec) -> Option<usize> {
    let (uv, uk, vv, vk) = (u.value_words(), u.known_words(), v.value_words(), v.known_words());
    let mut found = None;
    for w in 0..u.block_count() {
        let agree = uk[w] & vk[w] & !(uv[w] ^ vv[w]);
        let differ = !agree & u.block_mask(w);
        match differ.count_ones() {
            0 => {}
            1 if found.is_none() => {
                let b = differ.trailing_zeros() as usize;
                if (uk[w] ^ vk[w]) >> b & 1 == 0 {
                    return None;
                }
                found = Some(w * 64 + b);
            }
            _ => return None,
        }
    }
    found
}

/// In-place reduction to a fixpoint; pairs scanned (i asc, j asc) with each
/// substitution applied immediately.
pub(crate) fn reduce_in_place(pos: &mut [TritVec], neg: &mut [TritVec]) -> Vec<Substitution> {
    let mut log = Vec::new();
    loop {
        let mut changed = false;
        for (i, u) in pos.iter_mut().enumerate() {
            for (j, v) in neg.iter_mut().enumerate() {
                let Some(k) = forced_cell(u, v) else {
                    continue;
                };
                if let Some(b) = v.get(k).to_bool() {
                    u.set(k, Trit::from_bool(!b));
                    log.push(Substitution {
                        label: Label::Positive,
                        index: i,
                        var: k,
                        value: !b,
                    });
                } else {
                    let b = u.get(k).to_bool().expect("one side is certain");
                    v.set(k, Trit::from_bool(!b));
                    log.push(Substitution {
                        label: Label::Negative,
                        index: j,
                        var: k,
                        value: !b,
                    });
                }
                changed = true;
            }
        }
        if !changed {
            return log;
        }
    }
}

/// Fills every missing bit that is the only possible difference between a
/// positive and a negative instance, iterating until nothing changes.
pub fn reduce_uncertainty(d: &Dataset) -> Dataset {
    let mut pos: Vec<TritVec> = d.positives.iter().map(|i| i.cells.clone()).collect();
    let mut neg: Vec<TritVec> = d.negatives.iter().map(|i| i.cells.clone()).collect();
    reduce_in_place(&mut pos, &mut neg);
    let rebuild = |src: &[Instance], cells: Vec<TritVec>| -> Vec<Instance> {
        src.iter()
            .zip(cells)
            .map(|(i, c)| Instance::new(i.id.clone(), c, i.label))
            .collect()
    };
    Dataset {
        n: d.n,
        positives: rebuild(&d.positives, pos),
        negatives: rebuild(&d.negatives, neg),
    }
}

/// Which duplicates repetition deletion removes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DedupeMode {
    /// Only fully certain duplicates.
    Certain,
    /// Any exact ternary duplicate.
    #[default]
    Exact,
}

impl FromStr for DedupeMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "certain" => Ok(DedupeMode::Certain),
            "exact" => Ok(DedupeMode::Exact),
            other => Err(format!("unknown dedupe mode {other:?} (expected certain|exact)")),
        }
    }
}

impl fmt::Display for DedupeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DedupeMode::Certain => "certain",
            DedupeMode::Exact => "exact",
        })
    }
}

/// For each element, the index of the first equal element it duplicates, or
/// `None` if it is kept.
pub(crate) fn duplicate_of(cells: &[&TritVec], mode: DedupeMode) -> Vec<Option<usize>> {
    let mut first: HashMap<&TritVec, usize> = HashMap::new();
    cells
        .iter()
        .enumerate()
        .map(|(k, c)| {
            if mode == DedupeMode::Certain && !c.is_certain() {
                return None;
            }
            match first.get(*c) {
                Some(&orig) => Some(orig),
                None => {
                    first.insert(c, k);
                    None
                }
            }
        })
        .collect()
}

/// Removes repeated instances within each class, keeping first occurrences.
pub fn delete_repetitions(d: &Dataset, mode: DedupeMode) -> Dataset {
    let keep = |list: &[Instance]| -> Vec<Instance> {
        let cells: Vec<&TritVec> = list.iter().map(|i| &i.cells).collect();
        duplicate_of(&cells, mode)
            .into_iter()
            .zip(list)
            .filter(|(dup, _)| dup.is_none())
            .map(|(_, i)| i.clone())
            .collect()
    };
    Dataset {
        n: d.n,
        positives: keep(&d.positives),
        negatives: keep(&d.negatives),
    }
}
