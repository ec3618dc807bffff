//! Fixtures shared by the benchmarks.

use std::collections::HashSet;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ubrain::zoo::load_zoo;
use ubrain::{Dataset, DnfFormula, Instance, Label, Trit, TritVec, ZooRecord};

pub fn zoo_records() -> Vec<ZooRecord> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data/zoo.data");
    load_zoo(path).expect("bundled zoo.data").records
}

/// `size` distinct random rows over `n` variables labelled by a planted
/// three-term formula, each cell blanked with probability `missing`.
pub fn planted(n: usize, size: usize, missing: f64, seed: u64) -> Dataset {
    assert!(n >= 7, "planted formula uses x1..x7");
    let f = DnfFormula::parse_with_vars("x1 ~x2 | x3 x4 ~x5 | ~x6 x7", n).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::new();
    let (mut pos, mut neg) = (Vec::new(), Vec::new());
    while pos.len() + neg.len() < size {
        let bits: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
        if !seen.insert(bits.clone()) {
            continue;
        }
        let cells: Vec<Trit> = bits
            .iter()
            .map(|&b| if rng.random_bool(missing) { Trit::Unknown } else { Trit::from_bool(b) })
            .collect();
        let cells = TritVec::from_trits(&cells);
        if f.eval_certain(&bits).unwrap() {
            pos.push(Instance::new(format!("u{}", pos.len() + 1), cells, Label::Positive));
        } else {
            neg.push(Instance::new(format!("v{}", neg.len() + 1), cells, Label::Negative));
        }
    }
    Dataset::new(n, pos, neg).unwrap()
}
