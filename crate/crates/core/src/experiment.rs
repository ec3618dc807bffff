//! Missing-bit injection, error metrics and the one-vs-rest sweep over the
//! Zoo classes.
//!
//! Masks are drawn with ChaCha8 (`rand_chacha::ChaCha8Rng::seed_from_u64`)
//! by a partial Fisher-Yates shuffle over the candidate cells, listed
//! instance by instance (positives, then negatives) and variable by variable.
//! Every run of a sweep seeds the generator with the user seed unchanged, so
//! for one class and mode the mask at a larger fraction extends the mask at
//! a smaller one.

use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::time::{Duration, Instant};

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::dataset::{Dataset, Label};
use crate::formula::DnfFormula;
use crate::learner::{learn, LearnerConfig};
use crate::oracle::verify_consistency;
use crate::trit::Trit;
use crate::zoo::{encode_zoo, LegsEncoding, ZooRecord, TYPE_NAMES};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MaskError {
    #[error("fraction {0} is outside [0, 0.5]")]
    FractionOutOfRange(String),
    #[error("cannot parse fraction {0:?}")]
    BadFraction(String),
    #[error("trustworthy masking needs a reference formula")]
    MissingTruth,
    #[error("cell ({label}, {index}, x{var}) is outside the dataset", var = .var + 1)]
    CellOutOfRange {
        label: Label,
        index: usize,
        var: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MaskMode {
    Random,
    Trustworthy,
}

impl FromStr for MaskMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "random" => Ok(MaskMode::Random),
            "trustworthy" => Ok(MaskMode::Trustworthy),
            _ => Err(format!("unknown mask mode {s:?} (random|trustworthy)")),
        }
    }
}

impl fmt::Display for MaskMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MaskMode::Random => "random",
            MaskMode::Trustworthy => "trustworthy",
        })
    }
}

/// An exact masking fraction in `[0, 1/2]`.
///
/// Parsed from decimal text: values above 1 are percentages (`10` is 10%),
/// values up to 1 are fractions (`0.1` is 10%). A trailing `%` forces the
/// percentage reading.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fraction(Ratio<u64>);

impl Fraction {
    pub fn new(numer: u64, denom: u64) -> Result<Self, MaskError> {
        let r = Ratio::new(numer, denom);
        if r > Ratio::new(1, 2) {
            return Err(MaskError::FractionOutOfRange(format!("{numer}/{denom}")));
        }
        Ok(Fraction(r))
    }

    pub fn ratio(self) -> Ratio<u64> {
        self.0
    }

    pub fn is_zero(self) -> bool {
        *self.0.numer() == 0
    }

    /// `round(self * total)`, halves rounded up.
    pub fn of(self, total: usize) -> usize {
        let (a, b) = (*self.0.numer() as u128, *self.0.denom() as u128);
        ((2 * a * total as u128 + b) / (2 * b)) as usize
    }

    pub fn to_f64(self) -> f64 {
        *self.0.numer() as f64 / *self.0.denom() as f64
    }
}

fn parse_decimal(s: &str) -> Option<Ratio<u64>> {
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) || frac.len() > 12 {
        return None;
    }
    let scale = 10u64.pow(frac.len() as u32);
    let i: u64 = if int.is_empty() { 0 } else { int.parse().ok()? };
    let f: u64 = if frac.is_empty() { 0 } else { frac.parse().ok()? };
    Some(Ratio::new(i.checked_mul(scale)?.checked_add(f)?, scale))
}

impl FromStr for Fraction {
    type Err = MaskError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let (body, percent) = match t.strip_suffix('%') {
            Some(b) => (b.trim(), true),
            None => (t, false),
        };
        let mut r = parse_decimal(body).ok_or_else(|| MaskError::BadFraction(s.to_string()))?;
        if percent || r > Ratio::from_integer(1) {
            r /= 100;
        }
        if r > Ratio::new(1, 2) {
            return Err(MaskError::FractionOutOfRange(s.to_string()));
        }
        Ok(Fraction(r))
    }
}

impl fmt::Display for Fraction {
    /// As a percentage, with decimals only when needed.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pct = self.0 * 100;
        if pct.is_integer() {
            write!(f, "{}%", pct.to_integer())
        } else {
            write!(f, "{}%", self.to_f64() * 100.0)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CellRef {
    pub id: String,
    pub label: Label,
    /// Index within the instance's class.
    pub index: usize,
    /// 0-based variable.
    pub var: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskPlan {
    pub mode: MaskMode,
    pub fraction: Fraction,
    pub seed: u64,
    pub cells: Vec<CellRef>,
    /// Cells requested but unavailable (trustworthy mode only).
    pub shortfall: usize,
}

pub fn make_mask(
    d: &Dataset,
    mode: MaskMode,
    fraction: Fraction,
    seed: u64,
    truth: Option<&DnfFormula>,
) -> Result<MaskPlan, MaskError> {
    let n = d.n();
    let relevant: Vec<bool> = match mode {
        MaskMode::Random => vec![false; n],
        MaskMode::Trustworthy => {
            let f = truth.ok_or(MaskError::MissingTruth)?;
            let mut r = vec![false; n];
            for v in f.variables() {
                if v < n {
                    r[v] = true;
                }
            }
            r
        }
    };
    let mut candidates: Vec<CellRef> = Vec::new();
    for (label, list) in [(Label::Positive, d.positives()), (Label::Negative, d.negatives())] {
        for (index, inst) in list.iter().enumerate() {
            for var in (0..n).filter(|&v| !relevant[v]) {
                candidates.push(CellRef {
                    id: inst.id.clone(),
                    label,
                    index,
                    var,
                });
            }
        }
    }
    let wanted = fraction.of(d.len() * n);
    let take = wanted.min(candidates.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..take {
        let j = rng.random_range(i..candidates.len());
        candidates.swap(i, j);
    }
    candidates.truncate(take);
    Ok(MaskPlan {
        mode,
        fraction,
        seed,
        cells: candidates,
        shortfall: wanted - take,
    })
}

pub fn apply_mask(d: &Dataset, plan: &MaskPlan) -> Result<Dataset, MaskError> {
    let (n, mut pos, mut neg) = d.clone().into_parts();
    for c in &plan.cells {
        let list = match c.label {
            Label::Positive => &mut pos,
            Label::Negative => &mut neg,
        };
        match list.get_mut(c.index) {
            Some(inst) if c.var < n => inst.cells.set(c.var, Trit::Unknown),
            _ => {
                return Err(MaskError::CellOutOfRange {
                    label: c.label,
                    index: c.index,
                    var: c.var,
                })
            }
        }
    }
    Ok(Dataset::new(n, pos, neg).expect("shape unchanged"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Evaluation {
    /// Misclassified instances.
    pub errors: usize,
    pub size: usize,
}

impl Evaluation {
    pub fn rate(&self) -> Ratio<u64> {
        Ratio::new(self.errors as u64, self.size.max(1) as u64)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("instance {id:?} has missing cells; evaluation needs complete data")]
    NotCertain { id: String },
    #[error("formula has {formula} variables, data has {data}")]
    LengthMismatch { formula: usize, data: usize },
}

pub fn evaluate(f: &DnfFormula, complete: &Dataset) -> Result<Evaluation, EvalError> {
    if f.n() != complete.n() {
        return Err(EvalError::LengthMismatch {
            formula: f.n(),
            data: complete.n(),
        });
    }
    let mut errors = 0;
    for inst in complete.instances() {
        let bits = inst
            .cells
            .to_bools()
            .ok_or_else(|| EvalError::NotCertain { id: inst.id.clone() })?;
        if f.eval_certain(&bits).expect("length checked") != (inst.label == Label::Positive) {
            errors += 1;
        }
    }
    Ok(Evaluation {
        errors,
        size: complete.len(),
    })
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub types: Vec<u8>,
    pub fractions: Vec<Fraction>,
    pub modes: Vec<MaskMode>,
    pub seeds: Vec<u64>,
    pub encoding: LegsEncoding,
    pub learner: LearnerConfig,
    /// Check each learned formula against the learner's resolved data.
    pub verify: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            types: (1..=7).collect(),
            fractions: [10, 20, 30, 40, 50]
                .into_iter()
                .map(|p| Fraction::new(p, 100).expect("in range"))
                .collect(),
            modes: vec![MaskMode::Random, MaskMode::Trustworthy],
            seeds: vec![1, 2],
            encoding: LegsEncoding::default(),
            learner: LearnerConfig::default(),
            verify: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunOutcome {
    Learned {
        formula: DnfFormula,
        errors: usize,
        /// Violated certificates on the learner's resolved data.
        violations: Option<usize>,
        iterations: usize,
    },
    Abort {
        reason: String,
        consistency: bool,
    },
}

#[derive(Debug, Clone)]
pub struct RunRecord {
    pub animal_type: u8,
    pub mode: MaskMode,
    pub fraction: Fraction,
    pub seed: u64,
    pub masked: usize,
    pub shortfall: usize,
    pub size: usize,
    pub outcome: RunOutcome,
    pub runtime: Duration,
}

impl RunRecord {
    pub fn errors(&self) -> Option<usize> {
        match &self.outcome {
            RunOutcome::Learned { errors, .. } => Some(*errors),
            RunOutcome::Abort { .. } => None,
        }
    }
}

/// Aggregate over classes and seeds for one (mode, fraction).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SummaryRow {
    pub mode: MaskMode,
    pub fraction: Fraction,
    pub runs: usize,
    pub aborts: usize,
    pub total_errors: u64,
    pub size: usize,
}

impl SummaryRow {
    /// Mean error count over the runs that produced a formula.
    pub fn aen(&self) -> Option<Ratio<u64>> {
        let done = (self.runs - self.aborts) as u64;
        (done > 0).then(|| Ratio::new(self.total_errors, done))
    }

    pub fn rate(&self) -> Option<Ratio<u64>> {
        self.aen().map(|a| a / self.size.max(1) as u64)
    }

    pub fn aen_f64(&self) -> Option<f64> {
        self.aen().map(ratio_f64)
    }

    pub fn rate_f64(&self) -> Option<f64> {
        self.rate().map(ratio_f64)
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    /// Formula learned on unmasked data, per class in `types` order.
    pub truths: Vec<(u8, Result<DnfFormula, String>)>,
    /// Sorted by (type, mode, fraction, seed).
    pub runs: Vec<RunRecord>,
    pub runtime: Duration,
}

fn type_name(t: u8) -> &'static str {
    TYPE_NAMES.get(t as usize - 1).copied().unwrap_or("?")
}

fn ratio_f64(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn fmt_opt(r: Option<Ratio<u64>>, digits: usize) -> String {
    r.map_or_else(|| "ABORT".to_string(), |r| format!("{:.*}", digits, ratio_f64(r)))
}

pub fn run_experiment(records: &[ZooRecord], config: &ExperimentConfig) -> ExperimentReport {
    let start = Instant::now();
    let learner = LearnerConfig {
        threads: 1,
        trace: false,
        ..config.learner.clone()
    };
    let datasets: Vec<(u8, Dataset)> = config
        .types
        .iter()
        .map(|&t| (t, encode_zoo(records, t, config.encoding)))
        .collect();
    let truths: Vec<(u8, Result<DnfFormula, String>)> = datasets
        .par_iter()
        .map(|(t, d)| (*t, learn(d, &learner).map(|o| o.formula).map_err(|e| e.to_string())))
        .collect();

    let mut specs = Vec::new();
    for (k, &t) in config.types.iter().enumerate() {
        for &mode in &config.modes {
            for &fraction in &config.fractions {
                for &seed in &config.seeds {
                    specs.push((k, t, mode, fraction, seed));
                }
            }
        }
    }
    let mut runs: Vec<RunRecord> = specs
        .par_iter()
        .map(|&(k, t, mode, fraction, seed)| {
            let began = Instant::now();
            let d = &datasets[k].1;
            let truth = truths[k].1.as_ref().ok();
            let record = |masked, shortfall, outcome| RunRecord {
                animal_type: t,
                mode,
                fraction,
                seed,
                masked,
                shortfall,
                size: d.len(),
                outcome,
                runtime: began.elapsed(),
            };
            let plan = match make_mask(d, mode, fraction, seed, truth) {
                Ok(p) => p,
                Err(e) => {
                    return record(
                        0,
                        0,
                        RunOutcome::Abort {
                            reason: e.to_string(),
                            consistency: false,
                        },
                    )
                }
            };
            let masked = apply_mask(d, &plan).expect("plan drawn from this dataset");
            let outcome = match learn(&masked, &learner) {
                Ok(out) => {
                    let errors = evaluate(&out.formula, d).expect("unmasked data is complete").errors;
                    let violations = config.verify.then(|| {
                        verify_consistency(&out.formula, &out.resolved)
                            .ok()
                            .map(|certs| certs.iter().filter(|c| c.verdict.is_violated()).count())
                    });
                    RunOutcome::Learned {
                        formula: out.formula,
                        errors,
                        violations: violations.flatten(),
                        iterations: out.iterations,
                    }
                }
                Err(f) => RunOutcome::Abort {
                    reason: f.error.to_string(),
                    consistency: f.error.is_consistency_abort(),
                },
            };
            record(plan.cells.len(), plan.shortfall, outcome)
        })
        .collect();
    runs.sort_by_key(|r| (r.animal_type, r.mode, r.fraction, r.seed));
    ExperimentReport {
        truths,
        runs,
        runtime: start.elapsed(),
    }
}

impl ExperimentReport {
    /// One row per (mode, fraction), in sorted order.
    pub fn summary(&self) -> Vec<SummaryRow> {
        let mut rows: Vec<SummaryRow> = Vec::new();
        let mut keys: Vec<(MaskMode, Fraction)> =
            self.runs.iter().map(|r| (r.mode, r.fraction)).collect();
        keys.sort();
        keys.dedup();
        for (mode, fraction) in keys {
            let mine: Vec<&RunRecord> = self
                .runs
                .iter()
                .filter(|r| r.mode == mode && r.fraction == fraction)
                .collect();
            rows.push(SummaryRow {
                mode,
                fraction,
                runs: mine.len(),
                aborts: mine.iter().filter(|r| r.errors().is_none()).count(),
                total_errors: mine.iter().filter_map(|r| r.errors()).map(|e| e as u64).sum(),
                size: mine.first().map_or(0, |r| r.size),
            });
        }
        rows
    }

    pub fn summary_row(&self, mode: MaskMode, fraction: Fraction) -> Option<SummaryRow> {
        self.summary()
            .into_iter()
            .find(|r| r.mode == mode && r.fraction == fraction)
    }

    /// Per-class tables followed by the overall AEN / R table.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for (t, truth) in &self.truths {
            let _ = writeln!(out, "Type {t} ({})", type_name(*t));
            match truth {
                Ok(f) => {
                    let _ = writeln!(out, "  unmasked: {f}");
                }
                Err(e) => {
                    let _ = writeln!(out, "  unmasked: ABORT {e}");
                }
            }
            let _ = writeln!(out, "  {:<12} {:>8} {:>6} {:>4}  formula", "mode", "missing", "seed", "E");
            for r in self.runs.iter().filter(|r| r.animal_type == *t) {
                let (e, f) = match &r.outcome {
                    RunOutcome::Learned { formula, errors, .. } => (errors.to_string(), formula.to_string()),
                    RunOutcome::Abort { reason, .. } => ("-".to_string(), format!("ABORT {reason}")),
                };
                let _ = writeln!(
                    out,
                    "  {:<12} {:>8} {:>6} {:>4}  {f}",
                    r.mode.to_string(),
                    r.fraction.to_string(),
                    r.seed,
                    e
                );
            }
            out.push('\n');
        }
        let _ = writeln!(out, "Overall");
        let _ = writeln!(out, "  {:<12} {:>8} {:>5} {:>7} {:>8} {:>7}", "mode", "missing", "runs", "aborts", "AEN", "R");
        for s in self.summary() {
            let _ = writeln!(
                out,
                "  {:<12} {:>8} {:>5} {:>7} {:>8} {:>7}",
                s.mode.to_string(),
                s.fraction.to_string(),
                s.runs,
                s.aborts,
                fmt_opt(s.aen(), 2),
                fmt_opt(s.rate(), 3)
            );
        }
        out
    }

    pub fn runs_csv(&self) -> String {
        let mut out = String::from("type,mode,fraction,seed,masked,shortfall,status,errors,violations,formula\n");
        for r in &self.runs {
            let (status, errors, violations, formula) = match &r.outcome {
                RunOutcome::Learned {
                    formula,
                    errors,
                    violations,
                    ..
                } => (
                    "ok".to_string(),
                    errors.to_string(),
                    violations.map_or(String::new(), |v| v.to_string()),
                    formula.to_string(),
                ),
                RunOutcome::Abort { reason, .. } => {
                    (format!("ABORT {}", reason.replace([',', '"'], " ")), String::new(), String::new(), String::new())
                }
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{status},{errors},{violations},{formula}",
                r.animal_type,
                r.mode,
                r.fraction.to_f64(),
                r.seed,
                r.masked,
                r.shortfall
            );
        }
        out
    }

    pub fn summary_csv(&self) -> String {
        let mut out = String::from("mode,fraction,runs,aborts,aen,r\n");
        for s in self.summary() {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                s.mode,
                s.fraction.to_f64(),
                s.runs,
                s.aborts,
                s.aen().map_or("ABORT".into(), |a| ratio_f64(a).to_string()),
                s.rate().map_or("ABORT".into(), |a| ratio_f64(a).to_string())
            );
        }
        out
    }
}
