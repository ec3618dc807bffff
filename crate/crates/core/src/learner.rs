//! The greedy DNF learner.
//!
//! Each outer iteration preprocesses the working instances (uncertainty
//! reduction, repetition deletion), builds one constraint group per positive
//! instance and grows a term literal by literal, always taking the literal of
//! highest total relevance. A term is complete as soon as one group has had
//! all of its sets erased. The term is then added to the formula, the
//! positives it may cover are dropped, and each negative that could still
//! satisfy it gets one missing bit committed so that it cannot.
//!
//! [`learn`] drives the loop; [`LearnerState`] exposes the individual steps.

use std::fmt;

use num_rational::BigRational;
use rayon::prelude::*;
use thiserror::Error;

use crate::constraints::{ConstraintGroup, ConstraintSet, RelevanceScores};
use crate::dataset::{
    duplicate_of, find_violations, reduce_in_place, Dataset, DedupeMode, Instance, Label,
};
use crate::formula::{DnfFormula, Term};
use crate::literal::Literal;
use crate::trit::{Trit, TritVec};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LearnerConfig {
    pub dedupe: DedupeMode,
    /// Record a [`TraceEvent`] log.
    pub trace: bool,
    /// Outer-iteration cap; `None` means one more than the positive count.
    pub max_iterations: Option<usize>,
    /// Worker threads for set construction and scoring; `<= 1` runs inline.
    pub threads: usize,
    /// Run uncertainty reduction at the top of each iteration.
    pub reduce: bool,
    /// Commit missing bits of negatives after each term.
    pub update_negatives: bool,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        LearnerConfig {
            dedupe: DedupeMode::Exact,
            trace: false,
            max_iterations: None,
            threads: 1,
            reduce: true,
            update_negatives: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LearnError {
    #[error("positive {positive:?} and negative {negative:?} cannot be separated")]
    Inconsistent { positive: String, negative: String },
    #[error("term {term} is certainly true on negative {negative:?}")]
    TermCoversNegative { term: Term, negative: String },
    #[error("no literal has positive relevance while constraints remain (term so far: {term})")]
    NoCandidate { term: Term },
    #[error("term {term} erased no positive instance")]
    NoProgress { term: Term },
    #[error("iteration cap of {cap} exceeded")]
    IterationCap { cap: usize },
}

impl LearnError {
    /// The data (as updated so far) admits no consistent continuation.
    pub fn is_consistency_abort(&self) -> bool {
        matches!(
            self,
            LearnError::Inconsistent { .. }
                | LearnError::TermCoversNegative { .. }
                | LearnError::NoCandidate { .. }
        )
    }
}

/// One line of the learner trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceEvent {
    Select {
        literal: Literal,
        relevance: BigRational,
    },
    /// 1-based working indices within the current iteration.
    EraseSet { positive: usize, negative: usize },
    EraseGroup { positive: usize },
    Term(Term),
    PosErased { id: String },
    /// `var` is 1-based.
    NegUpdate { id: String, var: usize, value: bool },
    Abort { reason: String },
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceEvent::Select { literal, relevance } => write!(
                f,
                "SELECT {literal} R={}/{}",
                relevance.numer(),
                relevance.denom()
            ),
            TraceEvent::EraseSet { positive, negative } => {
                write!(f, "ERASE_SET {positive} {negative}")
            }
            TraceEvent::EraseGroup { positive } => write!(f, "ERASE_GROUP {positive}"),
            TraceEvent::Term(t) => write!(f, "TERM {t}"),
            TraceEvent::PosErased { id } => write!(f, "POS_ERASED {id}"),
            TraceEvent::NegUpdate { id, var, value } => {
                write!(f, "NEG_UPDATE {id} {var} {}", u8::from(*value))
            }
            TraceEvent::Abort { reason } => write!(f, "ABORT {reason}"),
        }
    }
}

/// Renders a trace as newline-terminated lines.
pub fn render_trace(events: &[TraceEvent]) -> String {
    let mut out = String::new();
    for e in events {
        out.push_str(&e.to_string());
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone)]
pub struct LearnOutcome {
    pub formula: DnfFormula,
    /// Every input instance with the missing bits the learner committed
    /// (reductions and negative updates); duplicates share their survivor's
    /// final state.
    pub resolved: Dataset,
    pub trace: Vec<TraceEvent>,
    pub iterations: usize,
}

#[derive(Debug, Clone, Error)]
#[error("{error}")]
pub struct LearnFailure {
    pub error: LearnError,
    pub partial: DnfFormula,
    pub trace: Vec<TraceEvent>,
    pub iterations: usize,
}

/// What [`LearnerState::apply_selection`] erased.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SelectionEffect {
    /// `(i, j)` working indices of sets hit by the literal.
    pub erased_sets: Vec<(usize, usize)>,
    /// Groups in which the literal does not occur, or that lost a set to
    /// complement removal.
    pub erased_groups: Vec<usize>,
    /// Sets that became empty when the complement was removed; the owning
    /// group cannot be completed by this term.
    pub emptied_sets: Vec<(usize, usize)>,
}

#[derive(Debug, Clone)]
struct Tracked {
    origin: usize,
    cells: TritVec,
}

/// The learner's working state: current instances, constraint groups, the
/// term under construction and the formula so far.
pub struct LearnerState {
    n: usize,
    config: LearnerConfig,
    pool: Option<rayon::ThreadPool>,
    positives: Vec<Tracked>,
    negatives: Vec<Tracked>,
    groups: Vec<ConstraintGroup>,
    p: usize,
    q: usize,
    term: Term,
    formula: DnfFormula,
    trace: Vec<TraceEvent>,
    resolved_pos: Vec<Instance>,
    resolved_neg: Vec<Instance>,
    alias_pos: Vec<Option<usize>>,
    alias_neg: Vec<Option<usize>>,
    iterations: usize,
    cap: usize,
}

impl LearnerState {
    pub fn new(d: &Dataset, config: LearnerConfig) -> Self {
        let track = |list: &[Instance]| -> Vec<Tracked> {
            list.iter()
                .enumerate()
                .map(|(origin, i)| Tracked {
                    origin,
                    cells: i.cells.clone(),
                })
                .collect()
        };
        let pool = (config.threads > 1).then(|| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(config.threads)
                .build()
                .expect("failed to start worker threads")
        });
        let cap = config.max_iterations.unwrap_or(d.positives().len() + 1);
        LearnerState {
            n: d.n(),
            pool,
            positives: track(d.positives()),
            negatives: track(d.negatives()),
            groups: Vec::new(),
            p: 0,
            q: 0,
            term: Term::default(),
            formula: DnfFormula::empty(d.n()),
            trace: Vec::new(),
            resolved_pos: d.positives().to_vec(),
            resolved_neg: d.negatives().to_vec(),
            alias_pos: vec![None; d.positives().len()],
            alias_neg: vec![None; d.negatives().len()],
            iterations: 0,
            cap,
            config,
        }
    }

    fn log(&mut self, e: TraceEvent) {
        if self.config.trace {
            self.trace.push(e);
        }
    }

    fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        match &self.pool {
            Some(p) => p.install(f),
            None => f(),
        }
    }

    /// The current working instances.
    pub fn working(&self) -> Dataset {
        let inst = |t: &Tracked, src: &[Instance], label| {
            Instance::new(src[t.origin].id.clone(), t.cells.clone(), label)
        };
        Dataset::new(
            self.n,
            self.positives
                .iter()
                .map(|t| inst(t, &self.resolved_pos, Label::Positive))
                .collect(),
            self.negatives
                .iter()
                .map(|t| inst(t, &self.resolved_neg, Label::Negative))
                .collect(),
        )
        .expect("working set keeps the input shape")
    }

    pub fn groups(&self) -> &[ConstraintGroup] {
        &self.groups
    }

    pub fn current_term(&self) -> &Term {
        &self.term
    }

    pub fn formula(&self) -> &DnfFormula {
        &self.formula
    }

    pub fn trace(&self) -> &[TraceEvent] {
        &self.trace
    }

    /// The divisors `(p, q)` frozen at the last set construction.
    pub fn divisors(&self) -> (usize, usize) {
        (self.p, self.q)
    }

    fn sync_pos(&mut self, k: usize) {
        let t = &self.positives[k];
        self.resolved_pos[t.origin].cells = t.cells.clone();
    }

    fn sync_neg(&mut self, k: usize) {
        let t = &self.negatives[k];
        self.resolved_neg[t.origin].cells = t.cells.clone();
    }

    fn check_consistency(&self) -> Result<(), LearnError> {
        let pos: Vec<TritVec> = self.positives.iter().map(|t| t.cells.clone()).collect();
        let neg: Vec<TritVec> = self.negatives.iter().map(|t| t.cells.clone()).collect();
        match find_violations(&pos, &neg).first() {
            None => Ok(()),
            Some(v) => Err(LearnError::Inconsistent {
                positive: self.resolved_pos[self.positives[v.positive].origin].id.clone(),
                negative: self.resolved_neg[self.negatives[v.negative].origin].id.clone(),
            }),
        }
    }

    /// Preprocesses the working set and builds the constraint groups.
    /// Returns `false` once no positive instance is left.
    pub fn begin_iteration(&mut self) -> Result<bool, LearnError> {
        if self.positives.is_empty() {
            return Ok(false);
        }
        self.iterations += 1;
        if self.iterations > self.cap {
            return Err(LearnError::IterationCap { cap: self.cap });
        }

        if self.config.reduce {
            let mut pos: Vec<TritVec> = self.positives.iter().map(|t| t.cells.clone()).collect();
            let mut neg: Vec<TritVec> = self.negatives.iter().map(|t| t.cells.clone()).collect();
            let subs = reduce_in_place(&mut pos, &mut neg);
            for s in subs {
                match s.label {
                    Label::Positive => {
                        self.positives[s.index].cells = pos[s.index].clone();
                        self.sync_pos(s.index);
                    }
                    Label::Negative => {
                        self.negatives[s.index].cells = neg[s.index].clone();
                        self.sync_neg(s.index);
                    }
                }
            }
        }

        let mode = self.config.dedupe;
        dedupe(&mut self.positives, &mut self.alias_pos, mode);
        dedupe(&mut self.negatives, &mut self.alias_neg, mode);

        self.check_consistency()?;

        self.p = self.positives.len();
        self.q = self.negatives.len();
        let weight = (self.p + self.q) as u32;
        let positives = &self.positives;
        let negatives = &self.negatives;
        let build = |i: usize| -> ConstraintGroup {
            let u = &positives[i].cells;
            ConstraintGroup {
                positive_index: i,
                sets: negatives
                    .iter()
                    .enumerate()
                    .map(|(j, v)| {
                        ConstraintSet::between((i, j), u, &v.cells, weight)
                            .expect("working instances share one length")
                    })
                    .collect(),
            }
        };
        self.groups = match &self.pool {
            Some(pool) => pool.install(|| (0..positives.len()).into_par_iter().map(build).collect()),
            None => (0..positives.len()).map(build).collect(),
        };
        self.term = Term::default();
        Ok(true)
    }

    /// Some surviving group has had every set erased.
    pub fn term_complete(&self) -> bool {
        self.groups.iter().any(ConstraintGroup::is_satisfied)
    }

    /// Relevance of every literal under the current groups.
    pub fn scores(&self) -> RelevanceScores {
        let parallel = self.pool.is_some();
        let (groups, n, p, q) = (&self.groups, self.n, self.p, self.q);
        let weight = (p + q) as u32;
        self.install(|| RelevanceScores::compute(groups, n, p, q, weight, parallel))
    }

    /// Picks the literal of maximal total relevance, complements of the
    /// term's literals excluded; ties go to the smallest literal.
    pub fn select_literal(&mut self) -> Result<(Literal, BigRational), LearnError> {
        let scores = self.scores();
        let term = &self.term;
        let best = scores.argmax(|l| term.contains(l.complement()));
        match best {
            Some(l) => {
                let r = scores.get(l);
                self.log(TraceEvent::Select {
                    literal: l,
                    relevance: r.clone(),
                });
                Ok((l, r))
            }
            None => Err(LearnError::NoCandidate {
                term: self.term.clone(),
            }),
        }
    }

    /// Appends `l` to the term and applies the erasure rules: drop the
    /// complement from groups where `l` occurs, erase groups where it does
    /// not, erase every set containing it.
    pub fn apply_selection(&mut self, l: Literal) -> SelectionEffect {
        self.term.push(l);
        let complement = l.complement();
        let mut effect = SelectionEffect::default();
        let mut kept = Vec::with_capacity(self.groups.len());
        for mut g in std::mem::take(&mut self.groups) {
            if !g.occurs(l) {
                effect.erased_groups.push(g.positive_index);
                continue;
            }
            let mut emptied = false;
            for s in &mut g.sets {
                if s.occurs(complement) {
                    s.remove(complement);
                    if s.is_empty() {
                        effect.emptied_sets.push(s.origin());
                        emptied = true;
                    }
                }
            }
            if emptied {
                effect.erased_groups.push(g.positive_index);
                continue;
            }
            g.sets.retain(|s| {
                if s.occurs(l) {
                    effect.erased_sets.push(s.origin());
                    false
                } else {
                    true
                }
            });
            kept.push(g);
        }
        self.groups = kept;
        if self.config.trace {
            for &i in &effect.erased_groups {
                self.trace.push(TraceEvent::EraseGroup { positive: i + 1 });
            }
            for &(i, j) in &effect.erased_sets {
                self.trace.push(TraceEvent::EraseSet {
                    positive: i + 1,
                    negative: j + 1,
                });
            }
        }
        effect
    }

    /// Adds the finished term to the formula and erases the positives that
    /// may satisfy it (no certain cell contradicts a literal).
    pub fn close_term(&mut self) -> Result<Term, LearnError> {
        let term = std::mem::take(&mut self.term);
        self.formula.push(term.clone());
        self.log(TraceEvent::Term(term.clone()));
        let before = self.positives.len();
        let mut erased = Vec::new();
        self.positives.retain(|t| {
            if term.possibly_satisfied_by(&t.cells) {
                erased.push(t.origin);
                false
            } else {
                true
            }
        });
        for origin in erased {
            let id = self.resolved_pos[origin].id.clone();
            self.log(TraceEvent::PosErased { id });
        }
        self.groups.clear();
        if self.positives.len() == before {
            return Err(LearnError::NoProgress { term });
        }
        Ok(term)
    }

    /// Commits, in every negative that could still satisfy `term`, its
    /// lowest-index missing bit among the term's variables to the value that
    /// falsifies the term; then re-checks self-consistency.
    pub fn update_negatives(&mut self, term: &Term) -> Result<(), LearnError> {
        if !self.config.update_negatives {
            return Ok(());
        }
        let mut vars: Vec<Literal> = term.literals().to_vec();
        vars.sort_by_key(|l| l.var);
        for k in 0..self.negatives.len() {
            let cells = &self.negatives[k].cells;
            if !term.possibly_satisfied_by(cells) {
                continue;
            }
            let Some(l) = vars.iter().find(|l| cells.get(l.var) == Trit::Unknown).copied() else {
                let negative = self.resolved_neg[self.negatives[k].origin].id.clone();
                return Err(LearnError::TermCoversNegative {
                    term: term.clone(),
                    negative,
                });
            };
            let value = !l.satisfying_value();
            self.negatives[k].cells.set(l.var, Trit::from_bool(value));
            self.sync_neg(k);
            let id = self.resolved_neg[self.negatives[k].origin].id.clone();
            self.log(TraceEvent::NegUpdate {
                id,
                var: l.var + 1,
                value,
            });
        }
        self.check_consistency()
    }

    fn run(&mut self) -> Result<(), LearnError> {
        while self.begin_iteration()? {
            while !self.term_complete() {
                if self.groups.is_empty() {
                    return Err(LearnError::NoCandidate {
                        term: self.term.clone(),
                    });
                }
                let (l, _) = self.select_literal()?;
                self.apply_selection(l);
            }
            let term = self.close_term()?;
            self.update_negatives(&term)?;
        }
        Ok(())
    }

    fn resolved(&self) -> Dataset {
        let settle = |list: &[Instance], alias: &[Option<usize>]| -> Vec<Instance> {
            list.iter()
                .enumerate()
                .map(|(k, inst)| {
                    let mut root = k;
                    while let Some(next) = alias[root] {
                        root = next;
                    }
                    Instance::new(inst.id.clone(), list[root].cells.clone(), inst.label)
                })
                .collect()
        };
        Dataset::new(
            self.n,
            settle(&self.resolved_pos, &self.alias_pos),
            settle(&self.resolved_neg, &self.alias_neg),
        )
        .expect("resolved set keeps the input shape")
    }

    pub fn finish(self) -> LearnOutcome {
        LearnOutcome {
            resolved: self.resolved(),
            formula: self.formula,
            trace: self.trace,
            iterations: self.iterations,
        }
    }
}

fn dedupe(list: &mut Vec<Tracked>, alias: &mut [Option<usize>], mode: DedupeMode) {
    let cells: Vec<&TritVec> = list.iter().map(|t| &t.cells).collect();
    let dups = duplicate_of(&cells, mode);
    if dups.iter().all(Option::is_none) {
        return;
    }
    for (k, d) in dups.iter().enumerate() {
        if let Some(orig) = d {
            alias[list[k].origin] = Some(list[*orig].origin);
        }
    }
    let mut it = dups.into_iter();
    list.retain(|_| it.next().flatten().is_none());
}

/// Learns a DNF formula consistent with `d`.
pub fn learn(d: &Dataset, config: &LearnerConfig) -> Result<LearnOutcome, LearnFailure> {
    let mut state = LearnerState::new(d, config.clone());
    match state.run() {
        Ok(()) => Ok(state.finish()),
        Err(error) => {
            state.log(TraceEvent::Abort {
                reason: error.to_string(),
            });
            Err(LearnFailure {
                error,
                partial: state.formula,
                trace: state.trace,
                iterations: state.iterations,
            })
        }
    }
}
