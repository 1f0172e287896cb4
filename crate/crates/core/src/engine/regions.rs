use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

use crate::cardenc::{CardinalityBox, Interval};
use crate::fol::{ground_count, Sentence};
use crate::rational::pow;

/// Splits every non-singleton interval at its midpoint and returns the
/// Cartesian product, earliest predicate varying slowest. Empty when every
/// interval is a singleton.
pub fn split_box(b: &CardinalityBox) -> Vec<CardinalityBox> {
    if b.is_all_singleton() {
        return Vec::new();
    }
    let mut out: Vec<Vec<_>> = vec![Vec::new()];
    for &(p, iv) in b.bounds() {
        let parts = if iv.is_singleton() {
            vec![iv]
        } else {
            let m = iv.lo + (iv.hi - iv.lo) / 2;
            vec![Interval::new(iv.lo, m), Interval::new(m + 1, iv.hi)]
        };
        out = out
            .into_iter()
            .flat_map(|prefix| {
                parts.iter().map(move |&part| {
                    let mut next = prefix.clone();
                    next.push((p, part));
                    next
                })
            })
            .collect();
    }
    out.into_iter().map(CardinalityBox::new).collect()
}

/// `w^n * wbar^(xi - n)`.
pub fn grounding_weight(w: &BigRational, wbar: &BigRational, n: u64, xi: u64) -> BigRational {
    pow(w, n) * pow(wbar, xi - n)
}

/// Smallest and largest weight of any interpretation inside the box.
///
/// The per-predicate weight is geometric in the count, so it is monotone and
/// its extremes sit at the interval endpoints.
pub fn region_weight_bounds(sentence: &Sentence, b: &CardinalityBox, d: u32) -> (BigRational, BigRational) {
    let mut t_min = BigRational::one();
    let mut t_max = BigRational::one();
    for &(p, iv) in b.bounds() {
        let pred = sentence.predicate(p);
        let xi = ground_count(pred, d).to_u64().expect("grounding count fits in u64");
        let a = grounding_weight(&pred.w, &pred.wbar, iv.lo, xi);
        let z = grounding_weight(&pred.w, &pred.wbar, iv.hi, xi);
        if a <= z {
            t_min *= a;
            t_max *= z;
        } else {
            t_min *= z;
            t_max *= a;
        }
    }
    (t_min, t_max)
}

/// Number of terms of the exact decomposition: the product of
/// `d^arity + 1` over weighted predicates.
pub fn term_count(sentence: &Sentence, d: u32) -> BigUint {
    sentence
        .weighted_predicates()
        .into_iter()
        .map(|p| ground_count(sentence.predicate(p), d) + 1u32)
        .product()
}

/// Largest number of oracle calls the anytime search can make: the
/// initial count plus every box of the complete split tree.
pub fn max_oracle_calls(sentence: &Sentence, d: u32) -> BigUint {
    // Per predicate, the multiset of interval lengths at the current depth.
    let mut levels: Vec<BTreeMap<BigUint, BigUint>> = sentence
        .weighted_predicates()
        .into_iter()
        .map(|p| BTreeMap::from([(ground_count(sentence.predicate(p), d) + 1u32, BigUint::one())]))
        .collect();
    let one = BigUint::one();
    let total_of = |m: &BTreeMap<BigUint, BigUint>| m.values().sum::<BigUint>();
    let singles_of = |m: &BTreeMap<BigUint, BigUint>| m.get(&one).cloned().unwrap_or_default();
    let mut calls = BigUint::one();
    loop {
        let prev_singletons: BigUint = levels.iter().map(singles_of).product();
        let prev_total: BigUint = levels.iter().map(total_of).product();
        if prev_total == prev_singletons {
            return calls;
        }
        for m in levels.iter_mut() {
            let mut next: BTreeMap<BigUint, BigUint> = BTreeMap::new();
            for (len, count) in std::mem::take(m) {
                if len == one {
                    *next.entry(len).or_default() += count;
                } else {
                    let hi: BigUint = (&len + 1u32) / 2u32;
                    let lo: BigUint = &len / 2u32;
                    *next.entry(hi).or_default() += &count;
                    *next.entry(lo).or_default() += count;
                }
            }
            *m = next;
        }
        let total: BigUint = levels.iter().map(total_of).product();
        calls += total - prev_singletons;
    }
}

/// `(lb / (1 + eps), ub * (1 + eps))`.
pub fn pac_adjust(lb: &BigRational, ub: &BigRational, epsilon: &BigRational) -> (BigRational, BigRational) {
    let f = BigRational::one() + epsilon;
    (lb / &f, ub * f)
}
