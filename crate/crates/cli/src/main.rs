use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use ubrain::experiment::{MaskError, RunOutcome};
use ubrain::learner::render_trace;
use ubrain::oracle::{minimal_dnf_exhaustive, verify_consistency, Verdict};
use ubrain::table::{load_ternary_csv, write_ternary_csv};
use ubrain::zoo::{load_zoo, zoo_table};
use ubrain::{
    apply_mask, evaluate, learn, make_mask, run_experiment, DedupeMode, DnfFormula,
    ExperimentConfig, Fraction, LabelRule, LearnerConfig, LegsEncoding, MaskMode, TernaryTable,
};

/// Learn DNF formulas from Boolean data with missing bits.
#[derive(Parser)]
#[command(name = "ubrain", version)]
struct Cli {
    /// Worker threads for the learner (output does not depend on it).
    #[arg(long, global = true, env = "UBRAIN_THREADS", default_value_t = 1)]
    threads: usize,
    /// Print machine-readable JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Learn a formula separating positive from negative instances.
    Learn(LearnArgs),
    /// Blank a fraction of the cells and write a ternary CSV.
    Mask(MaskArgs),
    /// Count instances a formula misclassifies.
    Eval(EvalArgs),
    /// Sweep classes, masking modes, fractions and seeds over the Zoo data.
    Experiment(ExperimentArgs),
    /// Check a formula against (possibly incomplete) data.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Zoo,
    Csv,
}

#[derive(Args)]
struct InputArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Zoo class (1..7) treated as positive.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=7))]
    positive_type: Option<u8>,
    /// CSV label marking positive rows; all other labels are negative.
    #[arg(long, conflicts_with = "positive_type")]
    positive_label: Option<String>,
    /// Leg counts for the Zoo leg bits x13..x17.
    #[arg(long, default_value = "8,6,5,4,2")]
    encoding: LegsEncoding,
}

#[derive(Args)]
struct LearnArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value = "exact")]
    dedupe: DedupeMode,
    /// Write the learner's event log here.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Formula text goes here, JSON to the same path plus `.json`.
    #[arg(long)]
    output: PathBuf,
    /// Skip uncertainty reduction.
    #[arg(long)]
    no_reduction: bool,
    /// Skip committing missing bits of negatives after each term.
    #[arg(long)]
    no_negative_update: bool,
}

#[derive(Args)]
struct MaskArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    mode: MaskMode,
    /// `0.1`, `10` and `10%` all mean ten percent; at most 50%.
    #[arg(long)]
    fraction: Fraction,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Reference formula (text, JSON, or a file holding either).
    #[arg(long)]
    truth: Option<String>,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    formula: PathBuf,
    #[command(flatten)]
    input: InputArgs,
}

#[derive(Args)]
struct ExperimentArgs {
    /// UCI zoo.data file.
    #[arg(long)]
    dataset: PathBuf,
    /// `all` or a comma-separated list of classes.
    #[arg(long, default_value = "all")]
    types: String,
    #[arg(long, value_delimiter = ',', default_value = "10,20,30,40,50")]
    fractions: Vec<Fraction>,
    #[arg(long, value_delimiter = ',', default_value = "random,trustworthy")]
    modes: Vec<MaskMode>,
    #[arg(long, value_delimiter = ',', default_value = "1,2")]
    seeds: Vec<u64>,
    /// Text report path; run and summary CSVs are written next to it.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, default_value = "8,6,5,4,2")]
    encoding: LegsEncoding,
    #[arg(long, default_value = "exact")]
    dedupe: DedupeMode,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    formula: PathBuf,
    #[command(flatten)]
    input: InputArgs,
    /// Also search for a smallest consistent formula (certain data, n <= 6).
    #[arg(long)]
    exhaustive_min: bool,
    #[arg(long, default_value_t = 12)]
    max_literals: usize,
}

enum Failure {
    Usage(String),
    Data(String),
    Abort(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Abort(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Data(m) | Failure::Abort(m) => m,
        }
    }
}

type Outcome = Result<(), Failure>;

fn data<E: std::fmt::Display>(context: impl std::fmt::Display) -> impl FnOnce(E) -> Failure {
    move |e| Failure::Data(format!("{context}: {e}"))
}

fn emit(json_mode: bool, value: Value, text: String) {
    if json_mode {
        println!("{}", serde_json::to_string_pretty(&value).expect("serializable"));
    } else {
        print!("{text}");
    }
}

fn load_table(args: &InputArgs) -> Result<TernaryTable, Failure> {
    match args.format {
        Format::Zoo => {
            let t = args
                .positive_type
                .ok_or_else(|| Failure::Usage("--format zoo needs --positive-type".into()))?;
            let z = load_zoo(&args.input).map_err(data(args.input.display()))?;
            if let Some(w) = z.count_warning {
                eprintln!("warning: {w}");
            }
            Ok(zoo_table(&z.records, t, args.encoding))
        }
        Format::Csv => {
            if args.positive_type.is_some() {
                return Err(Failure::Usage(
                    "--positive-type applies to --format zoo; use --positive-label".into(),
                ));
            }
            let rule = args
                .positive_label
                .clone()
                .map_or(LabelRule::Signs, LabelRule::PositiveIs);
            load_ternary_csv(&args.input, &rule).map_err(data(args.input.display()))
        }
    }
}

fn read_formula(source: &str, n: usize) -> Result<DnfFormula, Failure> {
    let path = Path::new(source);
    let text = if path.is_file() {
        fs::read_to_string(path).map_err(data(source))?
    } else {
        source.to_string()
    };
    DnfFormula::parse_any(&text, Some(n)).map_err(data(format!("formula {source}")))
}

fn write(path: &Path, contents: &str) -> Outcome {
    fs::write(path, contents).map_err(data(path.display()))
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn cmd_learn(args: LearnArgs, threads: usize, json_mode: bool) -> Outcome {
    let table = load_table(&args.input)?;
    let d = &table.dataset;
    let config = LearnerConfig {
        dedupe: args.dedupe,
        trace: args.trace.is_some(),
        threads,
        reduce: !args.no_reduction,
        update_negatives: !args.no_negative_update,
        ..Default::default()
    };
    let result = learn(d, &config);
    if let Some(path) = &args.trace {
        let events = match &result {
            Ok(o) => &o.trace,
            Err(f) => &f.trace,
        };
        write(path, &render_trace(events))?;
    }
    let out = result.map_err(|f| Failure::Abort(format!("learning aborted: {}", f.error)))?;
    let f = &out.formula;
    write(&args.output, &format!("{f}\n"))?;
    write(&with_suffix(&args.output, ".json"), &format!("{}\n", f.to_json()))?;
    let errors = d.is_certain().then(|| evaluate(f, d).expect("certain data").errors);
    let mut text = format!("{f}\nliterals={} terms={}", f.literal_count(), f.terms().len());
    if let Some(e) = errors {
        text.push_str(&format!(" E={e}"));
    }
    text.push('\n');
    emit(
        json_mode,
        json!({
            "formula": f.to_string(),
            "literals": f.literal_count(),
            "terms": f.terms().len(),
            "iterations": out.iterations,
            "errors": errors,
        }),
        text,
    );
    Ok(())
}

fn cmd_mask(args: MaskArgs, json_mode: bool) -> Outcome {
    let table = load_table(&args.input)?;
    let d = &table.dataset;
    let truth = match (&args.truth, args.mode) {
        (Some(t), _) => Some(read_formula(t, d.n())?),
        (None, MaskMode::Trustworthy) => {
            return Err(Failure::Usage("--mode trustworthy needs --truth".into()))
        }
        (None, MaskMode::Random) => None,
    };
    let plan = make_mask(d, args.mode, args.fraction, args.seed, truth.as_ref()).map_err(|e| match e {
        MaskError::MissingTruth | MaskError::FractionOutOfRange(_) | MaskError::BadFraction(_) => {
            Failure::Usage(e.to_string())
        }
        MaskError::CellOutOfRange { .. } => Failure::Data(e.to_string()),
    })?;
    let masked = apply_mask(d, &plan).map_err(data("mask"))?;
    let mut buf = Vec::new();
    write_ternary_csv(&mut buf, &table.with_dataset(masked)).map_err(data("csv"))?;
    fs::write(&args.output, buf).map_err(data(args.output.display()))?;
    let total = d.len() * d.n();
    let mut text = format!("masked {} of {total} cells", plan.cells.len());
    if plan.shortfall > 0 {
        text.push_str(&format!(" ({} short of the requested fraction)", plan.shortfall));
    }
    text.push('\n');
    let cells: Vec<Value> = plan
        .cells
        .iter()
        .map(|c| json!({"id": c.id, "var": c.var + 1}))
        .collect();
    emit(
        json_mode,
        json!({"masked": plan.cells.len(), "total": total, "shortfall": plan.shortfall, "cells": cells}),
        text,
    );
    Ok(())
}

fn cmd_eval(args: EvalArgs, json_mode: bool) -> Outcome {
    let table = load_table(&args.input)?;
    let d = &table.dataset;
    let f = read_formula(&args.formula.to_string_lossy(), d.n())?;
    let e = evaluate(&f, d).map_err(data("eval"))?;
    let rate = e.errors as f64 / e.size.max(1) as f64;
    emit(
        json_mode,
        json!({"errors": e.errors, "size": e.size, "rate": rate}),
        format!("E={} R={rate:.3}\n", e.errors),
    );
    Ok(())
}

fn parse_types(s: &str) -> Result<Vec<u8>, Failure> {
    if s.trim() == "all" {
        return Ok((1..=7).collect());
    }
    s.split(',')
        .map(|t| match t.trim().parse::<u8>() {
            Ok(v @ 1..=7) => Ok(v),
            _ => Err(Failure::Usage(format!("class {t:?} is not in 1..7"))),
        })
        .collect()
}

fn cmd_experiment(args: ExperimentArgs, json_mode: bool) -> Outcome {
    let types = parse_types(&args.types)?;
    let z = load_zoo(&args.dataset).map_err(data(args.dataset.display()))?;
    if let Some(w) = z.count_warning {
        eprintln!("warning: {w}");
    }
    let config = ExperimentConfig {
        types,
        fractions: args.fractions,
        modes: args.modes,
        seeds: args.seeds,
        encoding: args.encoding,
        learner: LearnerConfig {
            dedupe: args.dedupe,
            ..Default::default()
        },
        verify: true,
    };
    let started = Instant::now();
    let report = run_experiment(&z.records, &config);
    eprintln!("{} runs in {:.2} s", report.runs.len(), started.elapsed().as_secs_f64());
    let text = report.render_text();
    if let Some(path) = &args.report {
        write(path, &text)?;
        write(&with_suffix(path, ".runs.csv"), &report.runs_csv())?;
        write(&with_suffix(path, ".summary.csv"), &report.summary_csv())?;
    }
    let summary: Vec<Value> = report
        .summary()
        .iter()
        .map(|s| {
            json!({
                "mode": s.mode.to_string(),
                "fraction": s.fraction.to_f64(),
                "runs": s.runs,
                "aborts": s.aborts,
                "aen": s.aen_f64(),
                "r": s.rate_f64(),
            })
        })
        .collect();
    let runs: Vec<Value> = report
        .runs
        .iter()
        .map(|r| {
            let (status, errors, formula) = match &r.outcome {
                RunOutcome::Learned { formula, errors, .. } => ("ok".to_string(), Some(*errors), Some(formula.to_string())),
                RunOutcome::Abort { reason, .. } => (format!("ABORT {reason}"), None, None),
            };
            json!({
                "type": r.animal_type,
                "mode": r.mode.to_string(),
                "fraction": r.fraction.to_f64(),
                "seed": r.seed,
                "masked": r.masked,
                "status": status,
                "errors": errors,
                "formula": formula,
            })
        })
        .collect();
    emit(json_mode, json!({"summary": summary, "runs": runs}), text);
    Ok(())
}

fn cmd_verify(args: VerifyArgs, json_mode: bool) -> Outcome {
    let table = load_table(&args.input)?;
    let d = &table.dataset;
    let f = read_formula(&args.formula.to_string_lossy(), d.n())?;
    let certs = verify_consistency(&f, d).map_err(data("verify"))?;
    let mut text = String::new();
    let mut rows = Vec::new();
    let mut violated = 0;
    for c in &certs {
        let (kind, witness) = match &c.verdict {
            Verdict::Exact => ("exact", None),
            Verdict::CompletionWitness(w) => (
                "witness",
                Some(w.iter().map(|&b| if b { '1' } else { '0' }).collect::<String>()),
            ),
            Verdict::Violated => {
                violated += 1;
                ("VIOLATED", None)
            }
        };
        text.push_str(&format!("{} {} {kind}", c.id, c.label));
        if let Some(w) = &witness {
            text.push_str(&format!(" {w}"));
        }
        text.push('\n');
        rows.push(json!({"id": c.id, "label": c.label.to_string(), "verdict": kind, "witness": witness}));
    }
    text.push_str(&format!("violated={violated} of {}\n", certs.len()));
    let mut value = json!({"certificates": rows, "violated": violated, "formula": f.to_string()});
    if args.exhaustive_min {
        let m = minimal_dnf_exhaustive(d, args.max_literals).map_err(data("exhaustive search"))?;
        text.push_str(&format!(
            "minimal: {m} ({} literals; given formula has {})\n",
            m.literal_count(),
            f.literal_count()
        ));
        value["minimal"] = json!({"formula": m.to_string(), "literals": m.literal_count()});
    }
    emit(json_mode, value, text);
    if violated > 0 {
        return Err(Failure::Abort(format!("{violated} instance(s) contradict the formula")));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let threads = cli.threads.max(1);
    let result = match cli.command {
        Command::Learn(a) => cmd_learn(a, threads, cli.json),
        Command::Mask(a) => cmd_mask(a, cli.json),
        Command::Eval(a) => cmd_eval(a, cli.json),
        Command::Experiment(a) => cmd_experiment(a, cli.json),
        Command::Verify(a) => cmd_verify(a, cli.json),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
