//! Ternary cells and bit-packed ternary vectors.
//!
//! A [`TritVec`] stores two bitmasks per 64-cell block: a *value* mask and a
//! *known* mask. A cleared known bit is an [`Trit::Unknown`] cell, and its
//! value bit is always kept clear so that equal vectors have equal words.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

const WORD: usize = 64;

/// A cell value: `0`, `1`, or missing (`½`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Trit {
    False,
    Unknown,
    True,
}

impl Trit {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Trit::True
        } else {
            Trit::False
        }
    }

    pub fn is_known(self) -> bool {
        self != Trit::Unknown
    }

    /// The Boolean value, if certain.
    pub fn to_bool(self) -> Option<bool> {
        match self {
            Trit::False => Some(false),
            Trit::True => Some(true),
            Trit::Unknown => None,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Trit::False => '0',
            Trit::Unknown => '?',
            Trit::True => '1',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            '0' => Some(Trit::False),
            '1' => Some(Trit::True),
            '?' | '½' => Some(Trit::Unknown),
            _ => None,
        }
    }
}

impl From<bool> for Trit {
    fn from(b: bool) -> Self {
        Trit::from_bool(b)
    }
}

impl fmt::Display for Trit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_char())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid ternary cell {found:?} at position {position}")]
pub struct TritParseError {
    pub position: usize,
    pub found: char,
}

/// Fixed-length ternary vector, packed as (value, known) bitmask pairs.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TritVec {
    len: usize,
    value: Vec<u64>,
    known: Vec<u64>,
}

fn blocks_for(len: usize) -> usize {
    len.div_ceil(WORD)
}

impl TritVec {
    /// A vector of `len` unknown cells.
    pub fn unknown(len: usize) -> Self {
        let b = blocks_for(len);
        TritVec {
            len,
            value: vec![0; b],
            known: vec![0; b],
        }
    }

    pub fn from_trits(cells: &[Trit]) -> Self {
        let mut v = TritVec::unknown(cells.len());
        for (k, &t) in cells.iter().enumerate() {
            v.set(k, t);
        }
        v
    }

    pub fn from_bools(cells: &[bool]) -> Self {
        let mut v = TritVec::unknown(cells.len());
        for (k, &b) in cells.iter().enumerate() {
            v.set(k, Trit::from_bool(b));
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, k: usize) -> Trit {
        assert!(k < self.len, "cell {k} out of range for length {}", self.len);
        let (w, b) = (k / WORD, k % WORD);
        if self.known[w] >> b & 1 == 0 {
            Trit::Unknown
        } else if self.value[w] >> b & 1 == 1 {
            Trit::True
        } else {
            Trit::False
        }
    }

    pub fn set(&mut self, k: usize, t: Trit) {
        assert!(k < self.len, "cell {k} out of range for length {}", self.len);
        let (w, bit) = (k / WORD, 1u64 << (k % WORD));
        match t {
            Trit::Unknown => {
                self.known[w] &= !bit;
                self.value[w] &= !bit;
            }
            Trit::False => {
                self.known[w] |= bit;
                self.value[w] &= !bit;
            }
            Trit::True => {
                self.known[w] |= bit;
                self.value[w] |= bit;
            }
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = Trit> + '_ {
        (0..self.len).map(move |k| self.get(k))
    }

    pub fn to_trits(&self) -> Vec<Trit> {
        self.iter().collect()
    }

    /// The Boolean vector, if every cell is certain.
    pub fn to_bools(&self) -> Option<Vec<bool>> {
        self.iter().map(Trit::to_bool).collect()
    }

    pub fn unknown_count(&self) -> usize {
        self.len - self.known.iter().map(|w| w.count_ones() as usize).sum::<usize>()
    }

    pub fn is_certain(&self) -> bool {
        self.unknown_count() == 0
    }

    /// Indices of the unknown cells, ascending.
    pub fn unknown_positions(&self) -> Vec<usize> {
        (0..self.len).filter(|&k| !self.get(k).is_known()).collect()
    }

    pub fn value_words(&self) -> &[u64] {
        &self.value
    }

    pub fn known_words(&self) -> &[u64] {
        &self.known
    }

    /// Mask of the valid cell positions in block `w`.
    pub fn block_mask(&self, w: usize) -> u64 {
        block_mask(self.len, w)
    }

    pub(crate) fn block_count(&self) -> usize {
        self.value.len()
    }
}

/// Mask of the valid bit positions in block `w` of a `len`-cell vector.
pub(crate) fn block_mask(len: usize, w: usize) -> u64 {
    let start = w * WORD;
    if start + WORD <= len {
        u64::MAX
    } else if start >= len {
        0
    } else {
        (1u64 << (len - start)) - 1
    }
}

pub(crate) fn words_for(len: usize) -> usize {
    blocks_for(len)
}

impl fmt::Display for TritVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in self.iter() {
            write!(f, "{}", t.to_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for TritVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TritVec({self})")
    }
}

impl FromStr for TritVec {
    type Err = TritParseError;

    /// Parses `0`, `1` and `?` (or `½`) cells; whitespace and commas are skipped.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut cells = Vec::new();
        for (position, c) in s.chars().enumerate() {
            if c.is_whitespace() || c == ',' {
                continue;
            }
            cells.push(Trit::from_char(c).ok_or(TritParseError { position, found: c })?);
        }
        Ok(TritVec::from_trits(&cells))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn trit_order_matches_numeric_value() {
        assert!(Trit::False < Trit::Unknown);
        assert!(Trit::Unknown < Trit::True);
    }

    #[test]
    fn parse_and_display() {
        let v: TritVec = "1?0½".parse().unwrap();
        assert_eq!(v.len(), 4);
        assert_eq!(v.to_string(), "1?0?");
        assert_eq!(v.unknown_count(), 2);
        assert_eq!(v.unknown_positions(), vec![1, 3]);
        assert!("10x".parse::<TritVec>().is_err());
    }

    #[test]
    fn spans_multiple_blocks() {
        let mut v = TritVec::unknown(130);
        v.set(0, Trit::True);
        v.set(64, Trit::False);
        v.set(129, Trit::True);
        assert_eq!(v.get(0), Trit::True);
        assert_eq!(v.get(64), Trit::False);
        assert_eq!(v.get(129), Trit::True);
        assert_eq!(v.get(128), Trit::Unknown);
        assert_eq!(v.unknown_count(), 127);
        assert_eq!(v.block_mask(2), 0b11);
    }

    #[test]
    fn resetting_to_unknown_clears_value_bit() {
        let mut a: TritVec = "11".parse().unwrap();
        a.set(1, Trit::Unknown);
        let b: TritVec = "1?".parse().unwrap();
        assert_eq!(a, b);
    }

    proptest! {
        #[test]
        fn set_get_agree(cells in prop::collection::vec(0u8..3, 0..150)) {
            let trits: Vec<Trit> = cells.iter().map(|c| match c {
                0 => Trit::False, 1 => Trit::Unknown, _ => Trit::True,
            }).collect();
            let v = TritVec::from_trits(&trits);
            prop_assert_eq!(v.to_trits(), trits.clone());
            let reparsed: TritVec = v.to_string().parse().unwrap();
            prop_assert_eq!(reparsed, v);
        }
    }
}
