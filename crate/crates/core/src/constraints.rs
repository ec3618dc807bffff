//! Fuzzy constraint sets between a positive and a negative instance, and the
//! relevance hierarchy used as the greedy score.
//!
//! Memberships take only four values: `0`, `(½)^(p+q+1)` (both cells
//! unknown), `(½)^(p+q)` (one cell unknown) and `1` (certain difference).
//! Scaled by `2^(p+q+1)` they become the integers `0, 1, 2, 2^(p+q+1)`, which
//! is how the hot path stores and sums them. Nothing here touches floating
//! point: ties must be detected exactly for the tie-break to be meaningful.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::dataset::Instance;
use crate::literal::{Literal, Sign};
use crate::trit::{block_mask, words_for, TritVec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstraintError {
    #[error("instances have {left} and {right} cells")]
    LengthMismatch { left: usize, right: usize },
    #[error("constraint set ({positive}, {negative}) is empty")]
    EmptyConstraint { positive: usize, negative: usize },
}

/// Membership grade of a literal in a constraint set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Membership {
    Zero,
    /// Both cells unknown: `(½)^(p+q+1)`.
    BothUnknown,
    /// Exactly one cell unknown: `(½)^(p+q)`.
    OneUnknown,
    /// Certain difference: `1`.
    Certain,
}

impl Membership {
    /// The grade multiplied by `2^(weight_exponent + 1)`.
    pub fn scaled(self, weight_exponent: u32) -> BigUint {
        match self {
            Membership::Zero => BigUint::zero(),
            Membership::BothUnknown => BigUint::one(),
            Membership::OneUnknown => BigUint::from(2u8),
            Membership::Certain => BigUint::one() << (weight_exponent + 1),
        }
    }

    pub fn value(self, weight_exponent: u32) -> BigRational {
        let den = BigUint::one() << (weight_exponent + 1);
        ratio(self.scaled(weight_exponent), den)
    }
}

pub(crate) fn ratio(num: BigUint, den: BigUint) -> BigRational {
    BigRational::new(num.into(), den.into())
}

/// Per-sign literal masks, one bit per variable for each nonzero grade.
#[derive(Debug, Clone, PartialEq, Eq)]
struct GradeMasks {
    certain: Vec<u64>,
    one: Vec<u64>,
    both: Vec<u64>,
}

impl GradeMasks {
    fn zeros(words: usize) -> Self {
        GradeMasks {
            certain: vec![0; words],
            one: vec![0; words],
            both: vec![0; words],
        }
    }

    fn grade(&self, var: usize) -> Membership {
        let (w, b) = (var / 64, var % 64);
        if self.certain[w] >> b & 1 == 1 {
            Membership::Certain
        } else if self.one[w] >> b & 1 == 1 {
            Membership::OneUnknown
        } else if self.both[w] >> b & 1 == 1 {
            Membership::BothUnknown
        } else {
            Membership::Zero
        }
    }

    fn clear(&mut self, var: usize) {
        let (w, bit) = (var / 64, 1u64 << (var % 64));
        self.certain[w] &= !bit;
        self.one[w] &= !bit;
        self.both[w] &= !bit;
    }

    fn counts(&self) -> GradeCounts {
        let pop = |v: &[u64]| v.iter().map(|w| w.count_ones()).sum::<u32>();
        GradeCounts {
            certain: pop(&self.certain),
            one: pop(&self.one),
            both: pop(&self.both),
        }
    }

    fn is_empty(&self) -> bool {
        self.certain
            .iter()
            .chain(&self.one)
            .chain(&self.both)
            .all(|&w| w == 0)
    }
}

/// How many literals of each nonzero grade a set holds. Determines the
/// set's fuzzy cardinality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct GradeCounts {
    pub certain: u32,
    pub one: u32,
    pub both: u32,
}

impl GradeCounts {
    /// Cardinality multiplied by `2^(weight_exponent + 1)`.
    pub fn scaled_total(self, weight_exponent: u32) -> BigUint {
        (BigUint::from(self.certain) << (weight_exponent + 1))
            + BigUint::from(2 * self.one as u64 + self.both as u64)
    }

    fn add(self, o: GradeCounts) -> GradeCounts {
        GradeCounts {
            certain: self.certain + o.certain,
            one: self.one + o.one,
            both: self.both + o.both,
        }
    }

    fn is_zero(self) -> bool {
        self.certain == 0 && self.one == 0 && self.both == 0
    }
}

/// The fuzzy set `S_ij` of literals separating positive `i` from negative `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintSet {
    positive: usize,
    negative: usize,
    n: usize,
    weight_exponent: u32,
    pos: GradeMasks,
    neg: GradeMasks,
}

impl ConstraintSet {
    /// Builds the set for cells `u` (positive) and `v` (negative), where
    /// `weight_exponent = p + q`.
    pub fn between(
        origin: (usize, usize),
        u: &TritVec,
        v: &TritVec,
        weight_exponent: u32,
    ) -> Result<Self, ConstraintError> {
        if u.len() != v.len() {
            return Err(ConstraintError::LengthMismatch {
                left: u.len(),
                right: v.len(),
            });
        }
        let n = u.len();
        let words = words_for(n);
        let mut pos = GradeMasks::zeros(words);
        let mut neg = GradeMasks::zeros(words);
        let (uv, uk, vv, vk) = (u.value_words(), u.known_words(), v.value_words(), v.known_words());
        for w in 0..words {
            let m = block_mask(n, w);
            let both_known = uk[w] & vk[w];
            // u = 1, v = 0 / u = 0, v = 1
            pos.certain[w] = both_known & uv[w] & !vv[w];
            neg.certain[w] = both_known & !uv[w] & vv[w];
            // u > v with an unknown: (1, ½) or (½, 0)
            pos.one[w] = (uk[w] & uv[w] & !vk[w]) | (!uk[w] & vk[w] & !vv[w] & m);
            // u < v with an unknown: (0, ½) or (½, 1)
            neg.one[w] = (uk[w] & !uv[w] & !vk[w] & m) | (!uk[w] & vk[w] & vv[w]);
            let unknown_both = !uk[w] & !vk[w] & m;
            pos.both[w] = unknown_both;
            neg.both[w] = unknown_both;
        }
        Ok(ConstraintSet {
            positive: origin.0,
            negative: origin.1,
            n,
            weight_exponent,
            pos,
            neg,
        })
    }

    /// `(i, j)` indices of the generating pair.
    pub fn origin(&self) -> (usize, usize) {
        (self.positive, self.negative)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weight_exponent(&self) -> u32 {
        self.weight_exponent
    }

    fn side(&self, sign: Sign) -> &GradeMasks {
        match sign {
            Sign::Positive => &self.pos,
            Sign::Negative => &self.neg,
        }
    }

    pub fn membership(&self, l: Literal) -> Membership {
        self.side(l.sign).grade(l.var)
    }

    /// A literal occurs iff its membership is positive.
    pub fn occurs(&self, l: Literal) -> bool {
        self.membership(l) != Membership::Zero
    }

    /// Drops `l` from the set (membership becomes 0).
    pub fn remove(&mut self, l: Literal) {
        match l.sign {
            Sign::Positive => self.pos.clear(l.var),
            Sign::Negative => self.neg.clear(l.var),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.pos.is_empty() && self.neg.is_empty()
    }

    pub fn grade_counts(&self) -> GradeCounts {
        self.pos.counts().add(self.neg.counts())
    }

    /// Literals with positive membership, in literal order.
    pub fn literals(&self) -> impl Iterator<Item = (Literal, Membership)> + '_ {
        Literal::all(self.n)
            .map(|l| (l, self.membership(l)))
            .filter(|(_, m)| *m != Membership::Zero)
    }

    /// Adds this set's scaled memberships into `slots` (indexed by literal slot).
    fn accumulate(&self, slots: &mut [[u64; 3]]) {
        for (sign, masks) in [(Sign::Positive, &self.pos), (Sign::Negative, &self.neg)] {
            for (grade, words) in [(0, &masks.certain), (1, &masks.one), (2, &masks.both)] {
                for (w, &word) in words.iter().enumerate() {
                    let mut bits = word;
                    while bits != 0 {
                        let b = bits.trailing_zeros() as usize;
                        bits &= bits - 1;
                        let l = Literal {
                            var: w * 64 + b,
                            sign,
                        };
                        slots[l.slot(self.n)][grade] += 1;
                    }
                }
            }
        }
    }
}

/// Builds `S_ij` for a positive `u` and negative `v` given the current
/// instance counts `p` and `q`.
pub fn build_membership(
    u: &Instance,
    v: &Instance,
    p: usize,
    q: usize,
) -> Result<ConstraintSet, ConstraintError> {
    ConstraintSet::between((0, 0), &u.cells, &v.cells, (p + q) as u32)
}

/// Sum of memberships over all literals.
pub fn fuzzy_cardinality(s: &ConstraintSet) -> BigRational {
    let w = s.weight_exponent;
    ratio(s.grade_counts().scaled_total(w), BigUint::one() << (w + 1))
}

/// Membership of `l` divided by the set's cardinality.
pub fn relevance_ij(s: &ConstraintSet, l: Literal) -> Result<BigRational, ConstraintError> {
    let counts = s.grade_counts();
    if counts.is_zero() {
        return Err(ConstraintError::EmptyConstraint {
            positive: s.positive,
            negative: s.negative,
        });
    }
    let w = s.weight_exponent;
    Ok(ratio(s.membership(l).scaled(w), counts.scaled_total(w)))
}

/// The surviving constraint sets of one positive instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintGroup {
    pub positive_index: usize,
    pub sets: Vec<ConstraintSet>,
}

impl ConstraintGroup {
    /// A group with no sets left is satisfied.
    pub fn is_satisfied(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn occurs(&self, l: Literal) -> bool {
        self.sets.iter().any(|s| s.occurs(l))
    }
}

/// `(1/q) Σ_j R_ij(l)` over the surviving sets; `q` is the divisor fixed when
/// the group was built. Empty sets contribute nothing.
pub fn relevance_i(group: &ConstraintGroup, l: Literal, q: usize) -> BigRational {
    let sum = group
        .sets
        .iter()
        .filter_map(|s| relevance_ij(s, l).ok())
        .fold(BigRational::zero(), |a, b| a + b);
    sum / BigRational::from_integer(q.into())
}

/// `(1/p) Σ_i R_i(l)`, i.e. `(1/pq) Σ_i Σ_j R_ij(l)`.
pub fn total_relevance(groups: &[ConstraintGroup], l: Literal, p: usize, q: usize) -> BigRational {
    let sum = groups
        .iter()
        .map(|g| relevance_i(g, l, q))
        .fold(BigRational::zero(), |a, b| a + b);
    sum / BigRational::from_integer(p.into())
}

type Accumulator = HashMap<GradeCounts, Vec<[u64; 3]>>;

fn accumulate_group(mut acc: Accumulator, g: &ConstraintGroup, slots: usize) -> Accumulator {
    for s in &g.sets {
        let counts = s.grade_counts();
        if counts.is_zero() {
            continue;
        }
        let entry = acc.entry(counts).or_insert_with(|| vec![[0; 3]; slots]);
        s.accumulate(entry);
    }
    acc
}

fn merge(mut a: Accumulator, b: Accumulator) -> Accumulator {
    for (k, v) in b {
        match a.get_mut(&k) {
            Some(dst) => {
                for (d, s) in dst.iter_mut().zip(v) {
                    for g in 0..3 {
                        d[g] += s[g];
                    }
                }
            }
            None => {
                a.insert(k, v);
            }
        }
    }
    a
}

/// Adds `num_s / card` over all entries for every slot `s`, over the product
/// of the cardinalities, combining halves pairwise so operands stay balanced.
fn tree_sum(fractions: &[(BigUint, Vec<BigUint>)], parallel: bool) -> (BigUint, Vec<BigUint>) {
    if let [(card, nums)] = fractions {
        return (card.clone(), nums.clone());
    }
    let (left, right) = fractions.split_at(fractions.len() / 2);
    let ((pl, nl), (pr, nr)) = if parallel && fractions.len() > 16 {
        rayon::join(|| tree_sum(left, true), || tree_sum(right, true))
    } else {
        (tree_sum(left, false), tree_sum(right, false))
    };
    let nums = nl
        .into_iter()
        .zip(nr)
        .map(|(a, b)| match (a.is_zero(), b.is_zero()) {
            (true, true) => a,
            (false, true) => a * &pr,
            (true, false) => b * &pl,
            (false, false) => a * &pr + b * &pl,
        })
        .collect();
    (pl * pr, nums)
}

/// Total relevance of every literal over a common denominator.
///
/// Sets are bucketed by their cardinality, so the exact sum needs one
/// big-integer term per distinct cardinality rather than one rational
/// addition per set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelevanceScores {
    n: usize,
    numerators: Vec<BigUint>,
    denominator: BigUint,
}

impl RelevanceScores {
    /// `p` and `q` are the frozen divisors; `weight_exponent` is `p + q` at
    /// build time. With `parallel`, groups are folded on the current rayon
    /// pool; the result is identical either way.
    pub fn compute(
        groups: &[ConstraintGroup],
        n: usize,
        p: usize,
        q: usize,
        weight_exponent: u32,
        parallel: bool,
    ) -> Self {
        let slots = 2 * n;
        let acc = if parallel {
            groups
                .par_iter()
                .fold(Accumulator::new, |acc, g| accumulate_group(acc, g, slots))
                .reduce(Accumulator::new, merge)
        } else {
            groups
                .iter()
                .fold(Accumulator::new(), |acc, g| accumulate_group(acc, g, slots))
        };

        let certain_weight = BigUint::one() << (weight_exponent + 1);
        let mut by_card: BTreeMap<BigUint, Vec<BigUint>> = BTreeMap::new();
        for (k, per_slot) in acc.iter() {
            let entry = by_card
                .entry(k.scaled_total(weight_exponent))
                .or_insert_with(|| vec![BigUint::zero(); slots]);
            for (num, g) in entry.iter_mut().zip(per_slot.iter()) {
                if g[0] != 0 || g[1] != 0 || g[2] != 0 {
                    *num += &certain_weight * g[0] + BigUint::from(2 * g[1] + g[2]);
                }
            }
        }
        let fractions: Vec<(BigUint, Vec<BigUint>)> = by_card.into_iter().collect();
        let (product, numerators) = if fractions.is_empty() {
            (BigUint::one(), vec![BigUint::zero(); slots])
        } else {
            tree_sum(&fractions, parallel)
        };
        let denominator = product * BigUint::from(p.max(1)) * BigUint::from(q.max(1));
        RelevanceScores {
            n,
            numerators,
            denominator,
        }
    }

    pub fn get(&self, l: Literal) -> BigRational {
        ratio(self.numerators[l.slot(self.n)].clone(), self.denominator.clone())
    }

    pub fn is_zero(&self, l: Literal) -> bool {
        self.numerators[l.slot(self.n)].is_zero()
    }

    /// The literal of maximal positive score, ties going to the smallest in
    /// literal order; `excluded` literals score zero.
    pub fn argmax(&self, excluded: impl Fn(Literal) -> bool) -> Option<Literal> {
        let mut best: Option<(usize, &BigUint)> = None;
        for (slot, num) in self.numerators.iter().enumerate() {
            if num.is_zero() || excluded(Literal::from_slot(slot, self.n)) {
                continue;
            }
            // Slots are in literal order, so strict `>` keeps the earliest tie.
            if best.is_none_or(|(_, b)| num > b) {
                best = Some((slot, num));
            }
        }
        best.map(|(s, _)| Literal::from_slot(s, self.n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Label;
    use proptest::prelude::*;

    fn inst(s: &str, label: Label) -> Instance {
        Instance::new(s, s.parse().unwrap(), label)
    }

    fn lit(s: &str) -> Literal {
        s.parse().unwrap()
    }

    fn r(num: i64, den: i64) -> BigRational {
        BigRational::new(num.into(), den.into())
    }

    fn nonzero(s: &ConstraintSet) -> Vec<(String, BigRational)> {
        s.literals()
            .map(|(l, m)| (l.to_string(), m.value(s.weight_exponent())))
            .collect()
    }

    #[test]
    fn one_to_one_memberships() {
        let u = inst("110?1", Label::Positive);
        let v = inst("10010", Label::Negative);
        let s = build_membership(&u, &v, 1, 1).unwrap();
        assert_eq!(
            nonzero(&s),
            vec![
                ("x2".into(), r(1, 1)),
                ("x5".into(), r(1, 1)),
                ("~x4".into(), r(1, 4)),
            ]
        );
    }

    #[test]
    fn positive_unknown_against_two_negatives() {
        let u = inst("10?1", Label::Positive);
        let v = inst("1010", Label::Negative);
        let s = build_membership(&u, &v, 1, 2).unwrap();
        assert_eq!(
            nonzero(&s),
            vec![("x4".into(), r(1, 1)), ("~x3".into(), r(1, 8))]
        );
    }

    #[test]
    fn negative_unknown_weight_follows_instance_count() {
        // p + q = 4 gives (1/2)^4; the (1/2)^5 grade is reserved for cells
        // unknown on both sides.
        let u = inst("100", Label::Positive);
        let v = inst("1?1", Label::Negative);
        let s = build_membership(&u, &v, 1, 3).unwrap();
        assert_eq!(
            nonzero(&s),
            vec![("~x2".into(), r(1, 16)), ("~x3".into(), r(1, 1))]
        );
        // With five instances in play the same pair carries 1/32.
        let s5 = build_membership(&u, &v, 1, 4).unwrap();
        assert_eq!(s5.membership(lit("~x2")).value(5), r(1, 32));
    }

    #[test]
    fn shared_unknown_puts_both_literals_in() {
        let u = inst("?1", Label::Positive);
        let v = inst("?0", Label::Negative);
        let s = build_membership(&u, &v, 1, 1).unwrap();
        assert_eq!(s.membership(lit("x1")), Membership::BothUnknown);
        assert_eq!(s.membership(lit("~x1")), Membership::BothUnknown);
        assert_eq!(s.membership(lit("x1")).value(2), r(1, 8));
    }

    #[test]
    fn length_mismatch() {
        let u = inst("10", Label::Positive);
        let v = inst("100", Label::Negative);
        assert!(matches!(
            build_membership(&u, &v, 1, 1),
            Err(ConstraintError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn cardinality_examples() {
        let u = inst("100", Label::Positive);
        let s = build_membership(&u, &inst("011", Label::Negative), 1, 3).unwrap();
        assert_eq!(fuzzy_cardinality(&s), r(3, 1));

        let s = build_membership(&u, &inst("100", Label::Negative), 1, 1).unwrap();
        assert_eq!(fuzzy_cardinality(&s), r(0, 1));
        assert!(matches!(
            relevance_ij(&s, lit("x1")),
            Err(ConstraintError::EmptyConstraint { .. })
        ));

        let s = build_membership(&u, &inst("1?1", Label::Negative), 1, 4).unwrap();
        assert_eq!(fuzzy_cardinality(&s), r(33, 32));
        assert_eq!(relevance_ij(&s, lit("~x2")).unwrap(), r(1, 33));
        assert_eq!(relevance_ij(&s, lit("x1")).unwrap(), r(0, 1));
    }

    #[test]
    fn singleton_relevance_is_one() {
        let u = inst("100", Label::Positive);
        let s = build_membership(&u, &inst("101", Label::Negative), 1, 3).unwrap();
        assert_eq!(relevance_ij(&s, lit("~x3")).unwrap(), r(1, 1));
    }

    fn group(u: &str, negs: &[&str], p: usize, q: usize) -> ConstraintGroup {
        let ui = inst(u, Label::Positive);
        ConstraintGroup {
            positive_index: 0,
            sets: negs
                .iter()
                .enumerate()
                .map(|(j, v)| {
                    let vi = inst(v, Label::Negative);
                    ConstraintSet::between((0, j), &ui.cells, &vi.cells, (p + q) as u32).unwrap()
                })
                .collect(),
        }
    }

    #[test]
    fn group_relevance_examples() {
        let g = group("100", &["101"], 1, 2);
        assert_eq!(relevance_i(&g, lit("~x3"), 2), r(1, 2));
        assert_eq!(relevance_i(&g, lit("x2"), 2), r(0, 1));

        // Sets {x1,~x2,~x3}, {~x3}, {~x2 (1/32), ~x3}; memberships built at
        // p + q = 5 so the third set carries 1/32, divisor q = 3.
        let g = group("100", &["011", "101", "1?1"], 1, 4);
        let oracle = |l: &str| -> BigRational {
            // Hand-listed memberships, summed independently.
            let sets: [&[(&str, BigRational)]; 3] = [
                &[("x1", r(1, 1)), ("~x2", r(1, 1)), ("~x3", r(1, 1))],
                &[("~x3", r(1, 1))],
                &[("~x2", r(1, 32)), ("~x3", r(1, 1))],
            ];
            let mut total = r(0, 1);
            for s in sets {
                let card: BigRational = s.iter().map(|(_, m)| m.clone()).sum();
                if let Some((_, m)) = s.iter().find(|(name, _)| *name == l) {
                    total += m / card;
                }
            }
            total / r(3, 1)
        };
        let all: Vec<Literal> = Literal::all(3).collect();
        for &l in &all {
            assert_eq!(relevance_i(&g, l, 3), oracle(&l.to_string()), "{l}");
        }
        assert_eq!(relevance_i(&g, lit("~x3"), 3), r(76, 99));
        let best = all.iter().max_by_key(|&&l| relevance_i(&g, l, 3)).unwrap();
        assert_eq!(best.to_string(), "~x3");
        assert!(all
            .iter()
            .filter(|&&l| l != lit("~x3"))
            .all(|&l| relevance_i(&g, l, 3) < r(76, 99)));
    }

    #[test]
    fn total_relevance_examples() {
        let g = group("100", &["101"], 1, 2);
        assert_eq!(
            total_relevance(std::slice::from_ref(&g), lit("~x3"), 1, 2),
            relevance_i(&g, lit("~x3"), 2)
        );
        assert_eq!(total_relevance(&[], lit("~x3"), 3, 2), r(0, 1));
        // R_1 = 1/2, R_2 = 0 over p = 2.
        let g2 = group("111", &["110"], 2, 2);
        assert_eq!(
            total_relevance(&[g.clone(), g2], lit("~x3"), 2, 2),
            r(1, 4)
        );
    }

    #[test]
    fn argmax_breaks_ties_toward_positive_low_index() {
        let g = group("1?0", &["?00"], 1, 1);
        let scores = RelevanceScores::compute(&[g], 3, 1, 1, 2, false);
        assert_eq!(scores.get(lit("x1")), scores.get(lit("x2")));
        assert_eq!(scores.argmax(|_| false), Some(lit("x1")));
        assert_eq!(scores.argmax(|l| l == lit("x1")), Some(lit("x2")));
    }

    fn row(n: usize) -> impl Strategy<Value = String> {
        prop::collection::vec(prop::sample::select(vec!['0', '1', '?']), n)
            .prop_map(|v| v.into_iter().collect())
    }

    fn groups_strategy() -> impl Strategy<Value = (usize, Vec<String>, Vec<String>)> {
        (1usize..9).prop_flat_map(|n| {
            (
                Just(n),
                prop::collection::vec(row(n), 1..6),
                prop::collection::vec(row(n), 1..6),
            )
        })
    }

    fn build_groups(pos: &[String], neg: &[String]) -> Vec<ConstraintGroup> {
        let w = (pos.len() + neg.len()) as u32;
        pos.iter()
            .enumerate()
            .map(|(i, u)| {
                let u: TritVec = u.parse().unwrap();
                ConstraintGroup {
                    positive_index: i,
                    sets: neg
                        .iter()
                        .enumerate()
                        .map(|(j, v)| ConstraintSet::between((i, j), &u, &v.parse().unwrap(), w).unwrap())
                        .collect(),
                }
            })
            .collect()
    }

    proptest! {
        #[test]
        fn crisp_pairs_reduce_to_zero_one(n in 1usize..10, seed in any::<u64>(), p in 1usize..5, q in 1usize..5) {
            let bits = |s: u64| -> String { (0..n).map(|k| if s >> k & 1 == 1 { '1' } else { '0' }).collect() };
            let u: TritVec = bits(seed).parse().unwrap();
            let v: TritVec = bits(seed.rotate_left(17) ^ 0x5555).parse().unwrap();
            let s = ConstraintSet::between((0, 0), &u, &v, (p + q) as u32).unwrap();
            for l in Literal::all(n) {
                let expected = match l.sign {
                    Sign::Positive => u.get(l.var).to_bool() == Some(true) && v.get(l.var).to_bool() == Some(false),
                    Sign::Negative => u.get(l.var).to_bool() == Some(false) && v.get(l.var).to_bool() == Some(true),
                };
                prop_assert_eq!(s.membership(l), if expected { Membership::Certain } else { Membership::Zero });
            }
        }

        #[test]
        fn relevances_form_a_distribution((n, pos, neg) in groups_strategy()) {
            let groups = build_groups(&pos, &neg);
            let (p, q) = (pos.len(), neg.len());
            let mut total = BigRational::zero();
            for l in Literal::all(n) {
                let r = total_relevance(&groups, l, p, q);
                prop_assert!(r >= BigRational::zero() && r <= BigRational::one());
                total += r;
            }
            let nonempty = groups.iter().flat_map(|g| &g.sets).filter(|s| !s.is_empty()).count();
            prop_assert_eq!(total, BigRational::new(nonempty.into(), (p * q).into()));
        }

        #[test]
        fn bucketed_scores_match_direct_sums((n, pos, neg) in groups_strategy(), parallel in any::<bool>()) {
            let groups = build_groups(&pos, &neg);
            let (p, q) = (pos.len(), neg.len());
            let scores = RelevanceScores::compute(&groups, n, p, q, (p + q) as u32, parallel);
            for l in Literal::all(n) {
                prop_assert_eq!(scores.get(l), total_relevance(&groups, l, p, q));
            }
        }

        #[test]
        fn negating_a_variable_swaps_its_literals((n, pos, neg) in groups_strategy(), k in 0usize..9) {
            let k = k % n;
            let flip = |s: &String| -> String {
                s.chars().enumerate().map(|(i, c)| if i != k { c } else { match c { '0' => '1', '1' => '0', c => c } }).collect()
            };
            let w = (pos.len() + neg.len()) as u32;
            let u: TritVec = pos[0].parse().unwrap();
            let v: TritVec = neg[0].parse().unwrap();
            let uf: TritVec = flip(&pos[0]).parse().unwrap();
            let vf: TritVec = flip(&neg[0]).parse().unwrap();
            let a = ConstraintSet::between((0, 0), &u, &v, w).unwrap();
            let b = ConstraintSet::between((0, 0), &uf, &vf, w).unwrap();
            for l in Literal::all(n) {
                let mirrored = if l.var == k { l.complement() } else { l };
                prop_assert_eq!(a.membership(l), b.membership(mirrored));
            }
        }
    }
}
