use std::collections::HashMap;

use num_rational::BigRational;
use num_traits::Zero;

use super::OracleError;
use crate::fol::{ground_with, GroundConfig, Sentence};
use crate::rational::{from_u64, pow};

pub const BRUTE_FORCE_MAX_ATOMS: usize = 24;

/// Weighted model count by enumerating every assignment of the grounding.
/// Exact; handles negative weights.
pub fn wmc_bruteforce(sentence: &Sentence, d: u32) -> Result<BigRational, OracleError> {
    wmc_bruteforce_with(sentence, d, BRUTE_FORCE_MAX_ATOMS)
}

pub fn wmc_bruteforce_with(sentence: &Sentence, d: u32, max_atoms: usize) -> Result<BigRational, OracleError> {
    // Witness clauses are redundant for the weighted count; leaving them out
    // lets the signed Skolem weights do the cancelling.
    let config = GroundConfig {
        witness_clauses: false,
        ..GroundConfig::default()
    };
    let gp = ground_with(sentence, d, &config)?;
    let n = gp.num_vars as usize;
    if n > max_atoms || n > 63 {
        return Err(OracleError::ResourceLimit(format!(
            "{n} ground atoms exceed the brute-force cap of {max_atoms}"
        )));
    }
    let masks: Vec<(u64, u64)> = gp
        .clauses
        .iter()
        .map(|c| {
            c.iter().fold((0u64, 0u64), |(p, q), &l| {
                let bit = 1u64 << (l.unsigned_abs() - 1);
                if l > 0 { (p | bit, q) } else { (p, q | bit) }
            })
        })
        .collect();
    let preds: Vec<u64> = sentence
        .predicate_ids()
        .map(|id| {
            gp.atom_table
                .vars_of(id)
                .fold(0u64, |m, v| m | 1u64 << (v - 1))
        })
        .collect();
    // Models grouped by their per-predicate true counts; 5 bits per count.
    let mut histogram: HashMap<u128, u64> = HashMap::new();
    for m in 0u64..(1u64 << n) {
        if masks.iter().all(|&(p, q)| m & p != 0 || !m & q != 0) {
            let key = preds
                .iter()
                .fold(0u128, |k, &pm| (k << 5) | (m & pm).count_ones() as u128);
            *histogram.entry(key).or_default() += 1;
        }
    }
    let mut total = BigRational::zero();
    let sizes: Vec<u64> = preds.iter().map(|pm| pm.count_ones() as u64).collect();
    for (mut key, models) in histogram {
        let mut weight = from_u64(models);
        for (i, id) in sentence.predicate_ids().collect::<Vec<_>>().into_iter().enumerate().rev() {
            let k = (key & 31) as u64;
            key >>= 5;
            let p = sentence.predicate(id);
            weight *= pow(&p.w, k) * pow(&p.wbar, sizes[i] - k);
        }
        total += weight;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fol::parse_sentence;
    use crate::rational::parse_rational;

    #[test]
    fn coin_closed_form() {
        let s = parse_sentence(
            "predicate Heads/1 w=0.5 wbar=1\npredicate Tails/1 w=0.1 wbar=1\nclause Heads(X) Tails(X)\nclause !Heads(X) !Tails(X)\n",
        )
        .unwrap();
        assert_eq!(wmc_bruteforce(&s, 6).unwrap(), parse_rational("0.046656").unwrap());
        let neutral = parse_sentence("predicate Heads/1\npredicate Tails/1\nclause Heads(X) Tails(X)\nclause !Heads(X) !Tails(X)\n")
            .unwrap();
        assert_eq!(wmc_bruteforce(&neutral, 6).unwrap(), from_u64(64));
    }

    #[test]
    fn unsat_is_zero() {
        let s = parse_sentence("predicate P/0 w=2 wbar=3\nclause P\nclause !P\n").unwrap();
        assert!(wmc_bruteforce(&s, 1).unwrap().is_zero());
    }

    #[test]
    fn signed_skolem_weights_cancel() {
        // forall X exists Y F(X,Y) via Z(X) <-> exists Y F(X,Y) and S(X).
        let s = parse_sentence(
            "predicate F/2\npredicate Z/1 role=aux\npredicate S/1 role=skolem\n\
             clause Z(X)\nclause !F(X,Y) Z(X)\nclause Z(X) S(X)\nclause !F(X,Y) S(X)\n",
        )
        .unwrap();
        assert_eq!(wmc_bruteforce(&s, 2).unwrap(), from_u64(9));
    }

    #[test]
    fn cap_is_enforced() {
        let s = parse_sentence("predicate F/2\n").unwrap();
        assert!(matches!(wmc_bruteforce(&s, 5), Err(OracleError::ResourceLimit(_))));
        assert_eq!(wmc_bruteforce_with(&s, 2, 4).unwrap(), from_u64(16));
    }
}
