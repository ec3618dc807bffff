//! Greedy learning of DNF formulas from positive and negative Boolean
//! examples whose cells may be unknown.
//!
//! ```
//! use ubrain::{learn, Dataset, LearnerConfig};
//!
//! let d = Dataset::from_rows(&["100"], &["011", "101", "111"]);
//! let out = learn(&d, &LearnerConfig::default()).unwrap();
//! assert_eq!(out.formula.to_string(), "~x3");
//! ```

pub mod constraints;
pub mod dataset;
pub mod experiment;
pub mod formula;
pub mod learner;
pub mod literal;
pub mod oracle;
pub mod table;
pub mod trit;
pub mod zoo;

#[cfg(test)]
mod properties;

pub use constraints::{ConstraintGroup, ConstraintSet, Membership, RelevanceScores};
pub use dataset::{
    check_self_consistency, delete_repetitions, reduce_uncertainty, ConsistencyReport, DataError,
    Dataset, DedupeMode, Instance, Label,
};
pub use formula::{DnfFormula, FormulaError, Term, Ternary};
pub use learner::{learn, LearnError, LearnFailure, LearnOutcome, LearnerConfig, TraceEvent};
pub use literal::{Literal, Sign};
pub use trit::{Trit, TritVec};
pub use experiment::{
    apply_mask, evaluate, make_mask, run_experiment, Evaluation, ExperimentConfig,
    ExperimentReport, Fraction, MaskMode, MaskPlan,
};
pub use oracle::{minimal_dnf_exhaustive, reference_brain, verify_consistency, Verdict};
pub use table::{LabelRule, TernaryTable};
pub use zoo::{encode_zoo, load_zoo, zoo_table, LegsEncoding, ZooRecord};
