//! Cross-module properties over the public API.

use std::path::Path;

use num_rational::Ratio;
use proptest::prelude::*;
use crate::experiment::{MaskMode, RunOutcome};
use crate::zoo::parse_zoo;
use crate::{
    apply_mask, encode_zoo, evaluate, learn, make_mask, run_experiment, verify_consistency, Dataset,
    DnfFormula, ExperimentConfig, Fraction, LearnerConfig, LegsEncoding, Ternary, ZooRecord,
};

fn zoo() -> Vec<ZooRecord> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/zoo.data");
    parse_zoo(&std::fs::read_to_string(path).unwrap()).unwrap().records
}

fn row(n: usize, unknown_weight: u32) -> impl Strategy<Value = String> {
    prop::collection::vec(
        prop_oneof![4 => Just('0'), 4 => Just('1'), unknown_weight => Just('?')],
        n,
    )
    .prop_map(|cs| cs.into_iter().collect())
}

fn dataset(unknown_weight: u32) -> impl Strategy<Value = Dataset> {
    (1usize..8).prop_flat_map(move |n| {
        (
            prop::collection::vec(row(n, unknown_weight), 1..8),
            prop::collection::vec(row(n, unknown_weight), 0..8),
        )
            .prop_map(|(p, q)| {
                let p: Vec<&str> = p.iter().map(String::as_str).collect();
                let q: Vec<&str> = q.iter().map(String::as_str).collect();
                Dataset::from_rows(&p, &q)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn learner_output_is_well_formed(d in dataset(2)) {
        let Ok(out) = learn(&d, &LearnerConfig::default()) else { return Ok(()) };
        prop_assert!(out.iterations <= d.positives().len());
        for term in out.formula.terms() {
            for l in term.literals() {
                prop_assert!(!term.contains(l.complement()), "{term}");
            }
            let reachable = out
                .resolved
                .positives()
                .iter()
                .any(|u| term.eval_ternary(&u.cells) != Ternary::CertainlyFalse);
            prop_assert!(reachable, "{term} is false on every positive");
        }
        let certs = verify_consistency(&out.formula, &out.resolved).unwrap();
        prop_assert!(certs.iter().all(|c| !c.verdict.is_violated()));
    }

    #[test]
    fn crisp_output_classifies_every_row(d in dataset(0)) {
        let Ok(out) = learn(&d, &LearnerConfig::default()) else { return Ok(()) };
        let e = evaluate(&out.formula, &d).unwrap();
        prop_assert_eq!(e.errors, 0);
    }

    #[test]
    fn learning_is_repeatable(d in dataset(3), threads in 2usize..5) {
        let one = LearnerConfig { trace: true, ..LearnerConfig::default() };
        let many = LearnerConfig { threads, ..one.clone() };
        match (learn(&d, &one), learn(&d, &many)) {
            (Ok(a), Ok(b)) => {
                prop_assert_eq!(&a.formula, &b.formula);
                prop_assert_eq!(&a.trace, &b.trace);
                prop_assert_eq!(&a.resolved, &b.resolved);
            }
            (Err(a), Err(b)) => prop_assert_eq!(a.error, b.error),
            _ => prop_assert!(false, "outcomes differ"),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn masks_repeat_and_avoid_truth(t in 1u8..8, pct in 0u64..51, seed in any::<u64>()) {
        let records = zoo();
        let d = encode_zoo(&records, t, LegsEncoding::default());
        let truth = learn(&d, &LearnerConfig::default()).unwrap().formula;
        let fraction = Fraction::new(pct, 100).unwrap();
        for mode in [MaskMode::Random, MaskMode::Trustworthy] {
            let a = make_mask(&d, mode, fraction, seed, Some(&truth)).unwrap();
            let b = make_mask(&d, mode, fraction, seed, Some(&truth)).unwrap();
            prop_assert_eq!(&a, &b);
            prop_assert_eq!(a.cells.len() + a.shortfall, fraction.of(d.len() * d.n()));
            if mode == MaskMode::Trustworthy {
                let vars = truth.variables();
                prop_assert!(a.cells.iter().all(|c| !vars.contains(&c.var)));
                let masked = apply_mask(&d, &a).unwrap();
                let out = learn(&masked, &LearnerConfig::default());
                if let Ok(out) = out {
                    let certs = verify_consistency(&out.formula, &out.resolved).unwrap();
                    prop_assert!(certs.iter().all(|c| !c.verdict.is_violated()));
                }
            }
        }
    }
}

#[test]
fn consistent_formula_has_no_errors_on_its_data() {
    let records = zoo();
    for t in 1..=7 {
        let d = encode_zoo(&records, t, LegsEncoding::default());
        let f = learn(&d, &LearnerConfig::default()).unwrap().formula;
        assert!(verify_consistency(&f, &d).unwrap().iter().all(|c| !c.verdict.is_violated()));
        assert_eq!(evaluate(&f, &d).unwrap().errors, 0);
    }
    let d = encode_zoo(&records, 1, LegsEncoding::default());
    assert_eq!(evaluate(&DnfFormula::empty(20), &d).unwrap().errors, 41);
}

#[test]
fn summary_matches_raw_runs() {
    let config = ExperimentConfig {
        seeds: vec![3, 4],
        ..ExperimentConfig::default()
    };
    let report = run_experiment(&zoo(), &config);
    let summary = report.summary();
    assert_eq!(summary.len(), config.modes.len() * config.fractions.len());
    for row in summary {
        let runs: Vec<_> = report
            .runs
            .iter()
            .filter(|r| r.mode == row.mode && r.fraction == row.fraction)
            .collect();
        let errors: Vec<u64> = runs
            .iter()
            .filter_map(|r| match &r.outcome {
                RunOutcome::Learned { errors, .. } => Some(*errors as u64),
                RunOutcome::Abort { .. } => None,
            })
            .collect();
        assert_eq!(row.runs, runs.len());
        assert_eq!(row.aborts, runs.len() - errors.len());
        assert_eq!(row.total_errors, errors.iter().sum::<u64>());
        if !errors.is_empty() {
            let aen = Ratio::new(errors.iter().sum::<u64>(), errors.len() as u64);
            assert_eq!(row.aen(), Some(aen));
            assert_eq!(row.rate(), Some(aen / row.size as u64));
        }
    }
}
