//! The UCI Zoo file: 101 animals, 15 Boolean attributes, a leg count and a
//! class in `1..=7`.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use crate::dataset::{Dataset, Instance, Label};
use crate::table::TernaryTable;
use crate::trit::TritVec;

pub const ZOO_RECORDS: usize = 101;
pub const ZOO_VARS: usize = 20;
pub const LEG_VALUES: [u8; 6] = [0, 2, 4, 5, 6, 8];

/// Boolean attributes in file order; `legs` sits between `fins` and `tail`.
pub const BOOLEAN_ATTRIBUTES: [&str; 15] = [
    "hair", "feathers", "eggs", "milk", "airborne", "aquatic", "predator", "toothed", "backbone",
    "breathes", "venomous", "fins", "tail", "domestic", "catsize",
];

pub const TYPE_NAMES: [&str; 7] = [
    "mammal",
    "bird",
    "reptile",
    "fish",
    "amphibian",
    "insect",
    "invertebrate",
];

#[derive(Debug, Error)]
pub enum ZooError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CountWarning {
    pub found: usize,
}

impl fmt::Display for CountWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "expected {ZOO_RECORDS} zoo records, found {}", self.found)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZooRecord {
    pub name: String,
    /// Indexed like [`BOOLEAN_ATTRIBUTES`].
    pub attributes: [bool; 15],
    pub legs: u8,
    pub animal_type: u8,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZooData {
    pub records: Vec<ZooRecord>,
    pub count_warning: Option<CountWarning>,
}

pub fn load_zoo(path: impl AsRef<Path>) -> Result<ZooData, ZooError> {
    parse_zoo(&std::fs::read_to_string(path)?)
}

pub fn parse_zoo(text: &str) -> Result<ZooData, ZooError> {
    let mut records = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let raw = raw.trim();
        if raw.is_empty() {
            continue;
        }
        let err = |message: String| ZooError::Parse { line, message };
        let fields: Vec<&str> = raw.split(',').map(str::trim).collect();
        if fields.len() != 18 {
            return Err(err(format!("expected 18 fields, found {}", fields.len())));
        }
        let mut attributes = [false; 15];
        let mut slot = 0;
        for (col, field) in fields[1..17].iter().enumerate() {
            if col == 12 {
                continue;
            }
            attributes[slot] = match *field {
                "0" => false,
                "1" => true,
                other => {
                    return Err(err(format!(
                        "attribute {} must be 0 or 1, found {other:?}",
                        BOOLEAN_ATTRIBUTES[slot]
                    )))
                }
            };
            slot += 1;
        }
        let legs: u8 = fields[13]
            .parse()
            .ok()
            .filter(|l| LEG_VALUES.contains(l))
            .ok_or_else(|| err(format!("legs must be one of 0,2,4,5,6,8, found {:?}", fields[13])))?;
        let animal_type: u8 = fields[17]
            .parse()
            .ok()
            .filter(|t| (1..=7).contains(t))
            .ok_or_else(|| err(format!("type must be in 1..7, found {:?}", fields[17])))?;
        records.push(ZooRecord {
            name: fields[0].to_string(),
            attributes,
            legs,
            animal_type,
        });
    }
    if records.is_empty() {
        return Err(ZooError::Parse {
            line: 0,
            message: "no records".into(),
        });
    }
    let count_warning = (records.len() != ZOO_RECORDS).then_some(CountWarning {
        found: records.len(),
    });
    Ok(ZooData {
        records,
        count_warning,
    })
}

/// Leg counts assigned to the five leg bits `x13..x17`. A legless animal
/// has all five bits clear.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LegsEncoding(pub [u8; 5]);

impl Default for LegsEncoding {
    fn default() -> Self {
        LegsEncoding([8, 6, 5, 4, 2])
    }
}

impl FromStr for LegsEncoding {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let values: Vec<u8> = s
            .split(',')
            .map(|v| v.trim().parse::<u8>().map_err(|_| format!("bad leg count {v:?}")))
            .collect::<Result<_, _>>()?;
        let mut sorted = values.clone();
        sorted.sort_unstable();
        if sorted != [2, 4, 5, 6, 8] {
            return Err(format!(
                "encoding must be a permutation of 2,4,5,6,8, found {s:?}"
            ));
        }
        Ok(LegsEncoding(values.try_into().expect("five values")))
    }
}

impl fmt::Display for LegsEncoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u8::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

/// Column names for the encoded variables, `x1..x20` in order.
pub fn variable_names(encoding: LegsEncoding) -> Vec<String> {
    let mut names: Vec<String> = BOOLEAN_ATTRIBUTES[..12].iter().map(|s| s.to_string()).collect();
    names.extend(encoding.0.iter().map(|l| format!("legs{l}")));
    names.extend(BOOLEAN_ATTRIBUTES[12..].iter().map(|s| s.to_string()));
    names
}

pub fn encode_record(r: &ZooRecord, encoding: LegsEncoding) -> Vec<bool> {
    let mut bits = Vec::with_capacity(ZOO_VARS);
    bits.extend_from_slice(&r.attributes[..12]);
    bits.extend(encoding.0.iter().map(|&l| r.legs == l));
    bits.extend_from_slice(&r.attributes[12..]);
    bits
}

/// Instance ids: the animal's name, with `#2`, `#3`, ... on repeats.
pub fn record_ids(records: &[ZooRecord]) -> Vec<String> {
    let mut seen: HashMap<&str, usize> = HashMap::new();
    records
        .iter()
        .map(|r| {
            let k = seen.entry(&r.name).or_insert(0);
            *k += 1;
            if *k == 1 {
                r.name.clone()
            } else {
                format!("{}#{k}", r.name)
            }
        })
        .collect()
}

/// One-vs-rest split: animals of `positive_type` are positive. File order is
/// kept within each class.
pub fn encode_zoo(records: &[ZooRecord], positive_type: u8, encoding: LegsEncoding) -> Dataset {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for (r, id) in records.iter().zip(record_ids(records)) {
        let cells = TritVec::from_bools(&encode_record(r, encoding));
        if r.animal_type == positive_type {
            pos.push(Instance::new(id, cells, Label::Positive));
        } else {
            neg.push(Instance::new(id, cells, Label::Negative));
        }
    }
    Dataset::new(ZOO_VARS, pos, neg).expect("encoded rows have 20 cells")
}

/// The one-vs-rest split as a table in file order, with `+`/`-` labels and
/// attribute names as column headers.
pub fn zoo_table(records: &[ZooRecord], positive_type: u8, encoding: LegsEncoding) -> TernaryTable {
    let dataset = encode_zoo(records, positive_type, encoding);
    let (mut p, mut q) = (0, 0);
    let mut rows = Vec::with_capacity(records.len());
    let mut label_text = Vec::with_capacity(records.len());
    for r in records {
        if r.animal_type == positive_type {
            rows.push((Label::Positive, p));
            p += 1;
            label_text.push("+".to_string());
        } else {
            rows.push((Label::Negative, q));
            q += 1;
            label_text.push("-".to_string());
        }
    }
    TernaryTable {
        names: variable_names(encoding),
        dataset,
        rows,
        label_text,
        has_ids: true,
    }
}
