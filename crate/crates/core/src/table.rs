//! Generic ternary CSV: a header of variable names plus a `label` column and
//! an optional `id` column; cells are `0`, `1` or `?`.

use std::io::{Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::dataset::{Dataset, Instance, Label};
use crate::trit::{Trit, TritVec};

#[derive(Debug, Error)]
pub enum TableError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

/// How the `label` column maps to classes.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum LabelRule {
    /// `+` is positive, `-` negative; anything else is an error.
    #[default]
    Signs,
    /// Rows carrying exactly this label are positive, all others negative.
    PositiveIs(String),
}

impl LabelRule {
    fn classify(&self, text: &str) -> Option<Label> {
        match self {
            LabelRule::Signs => match text {
                "+" => Some(Label::Positive),
                "-" => Some(Label::Negative),
                _ => None,
            },
            LabelRule::PositiveIs(p) => Some(if text == p {
                Label::Positive
            } else {
                Label::Negative
            }),
        }
    }
}

/// A dataset together with what is needed to write it back in row order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TernaryTable {
    pub names: Vec<String>,
    pub dataset: Dataset,
    /// File order as (class, index within class).
    pub rows: Vec<(Label, usize)>,
    /// Label text per row, as read.
    pub label_text: Vec<String>,
    pub has_ids: bool,
}

impl TernaryTable {
    /// Wraps a dataset with positives first and `+`/`-` labels.
    pub fn from_dataset(names: Vec<String>, dataset: Dataset) -> Self {
        let rows: Vec<(Label, usize)> = (0..dataset.positives().len())
            .map(|i| (Label::Positive, i))
            .chain((0..dataset.negatives().len()).map(|j| (Label::Negative, j)))
            .collect();
        let label_text = rows.iter().map(|(l, _)| l.to_string()).collect();
        TernaryTable {
            names,
            dataset,
            rows,
            label_text,
            has_ids: true,
        }
    }

    /// Same layout around a dataset with the same shape.
    pub fn with_dataset(&self, dataset: Dataset) -> Self {
        assert_eq!(dataset.positives().len(), self.dataset.positives().len());
        assert_eq!(dataset.negatives().len(), self.dataset.negatives().len());
        TernaryTable {
            dataset,
            ..self.clone()
        }
    }

    pub fn instance(&self, row: usize) -> &Instance {
        let (label, k) = self.rows[row];
        match label {
            Label::Positive => &self.dataset.positives()[k],
            Label::Negative => &self.dataset.negatives()[k],
        }
    }
}

pub fn default_names(n: usize) -> Vec<String> {
    (1..=n).map(|k| format!("x{k}")).collect()
}

pub fn load_ternary_csv(path: impl AsRef<Path>, rule: &LabelRule) -> Result<TernaryTable, TableError> {
    read_ternary_csv(std::fs::File::open(path)?, rule)
}

pub fn read_ternary_csv<R: Read>(input: R, rule: &LabelRule) -> Result<TernaryTable, TableError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(input);
    let header = reader.headers()?.clone();
    let label_col = header
        .iter()
        .position(|h| h == "label")
        .ok_or_else(|| TableError::Parse {
            line: 1,
            message: "header has no `label` column".into(),
        })?;
    let id_col = header.iter().position(|h| h == "id");
    let var_cols: Vec<usize> = (0..header.len())
        .filter(|&c| c != label_col && Some(c) != id_col)
        .collect();
    let names: Vec<String> = var_cols.iter().map(|&c| header[c].to_string()).collect();

    let mut pos = Vec::new();
    let mut neg = Vec::new();
    let mut rows = Vec::new();
    let mut label_text = Vec::new();
    for (k, rec) in reader.records().enumerate() {
        let rec = rec?;
        let line = rec.position().map_or(k + 2, |p| p.line() as usize);
        let err = |message: String| TableError::Parse { line, message };
        if rec.len() != header.len() {
            return Err(err(format!("expected {} fields, found {}", header.len(), rec.len())));
        }
        let cells: Vec<Trit> = var_cols
            .iter()
            .map(|&c| match &rec[c] {
                "0" => Ok(Trit::False),
                "1" => Ok(Trit::True),
                "?" => Ok(Trit::Unknown),
                other => Err(err(format!("cell in column {:?} must be 0, 1 or ?, found {other:?}", &header[c]))),
            })
            .collect::<Result<_, _>>()?;
        let text = &rec[label_col];
        let label = rule
            .classify(text)
            .ok_or_else(|| err(format!("label must be + or -, found {text:?}")))?;
        let id = match id_col {
            Some(c) => rec[c].to_string(),
            None => format!("r{}", k + 1),
        };
        let inst = Instance::new(id, TritVec::from_trits(&cells), label);
        match label {
            Label::Positive => {
                rows.push((label, pos.len()));
                pos.push(inst);
            }
            Label::Negative => {
                rows.push((label, neg.len()));
                neg.push(inst);
            }
        }
        label_text.push(text.to_string());
    }
    let dataset = Dataset::new(names.len(), pos, neg).expect("rows checked against header");
    Ok(TernaryTable {
        names,
        dataset,
        rows,
        label_text,
        has_ids: id_col.is_some(),
    })
}

/// Writes `id` (when the table has ids), the variables, then `label`.
pub fn write_ternary_csv<W: Write>(out: W, table: &TernaryTable) -> Result<(), TableError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = Vec::with_capacity(table.names.len() + 2);
    if table.has_ids {
        header.push("id");
    }
    header.extend(table.names.iter().map(String::as_str));
    header.push("label");
    w.write_record(&header)?;
    for row in 0..table.rows.len() {
        let inst = table.instance(row);
        let mut rec: Vec<String> = Vec::with_capacity(header.len());
        if table.has_ids {
            rec.push(inst.id.clone());
        }
        rec.extend(inst.cells.iter().map(|t| {
            match t {
                Trit::False => "0",
                Trit::True => "1",
                Trit::Unknown => "?",
            }
            .to_string()
        }));
        rec.push(table.label_text[row].clone());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
